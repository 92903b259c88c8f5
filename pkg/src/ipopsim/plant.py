"""Averaged electrical model of one AC-DC-DC module and the shared output bus.

Chain per module: six-pulse diode rectifier -> L1/C1 DC link -> averaged
phase-shifted full bridge (buck-like) -> L2, feeding a common capacitor bus
with a resistive load.  The scalar right-hand side is compiled with numba and
shared between the pure-Python helpers and the fast multi-module kernel.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit
from scipy import integrate

from .analysis.tf import RationalTf

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridParams:
    u_ll_rms: float = 380.0   # line-to-line RMS [V]
    f_grid: float = 50.0      # [Hz]
    m: int = 6                # pulse count

    def __post_init__(self):
        if not self.u_ll_rms > 0:
            raise ValueError("u_ll_rms must be positive")
        if not self.f_grid > 0:
            raise ValueError("f_grid must be positive")
        if int(self.m) != self.m or self.m < 2:
            raise ValueError("pulse count m must be an integer >= 2")

    @property
    def peak(self) -> float:
        return math.sqrt(2.0) * self.u_ll_rms

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.f_grid

    @property
    def ripple_period(self) -> float:
        """T_m = 1/(m*f_grid)."""
        return 1.0 / (self.m * self.f_grid)

    @property
    def u_d0(self) -> float:
        """Closed-form mean of the envelope, (m/pi)*sin(pi/m)*peak."""
        return self.peak * self.m / math.pi * math.sin(math.pi / self.m)


@dataclass(frozen=True)
class PlantParams:
    """Electrical parameters.  Defaults are the rated design values except R_d and R_s.

    R_load is the load seen by whatever the parameters describe: the whole
    bus inside the simulator, or one module's share (N*R_load) for the
    single-module transfer functions (see ``per_module``).
    """
    n: float = 1.0 / 1.5       # transformer factor, "1:1.5" read as 1/1.5
    L_lk: float = 30e-6
    L1: float = 3200e-6
    C1: float = 3000e-6
    L2: float = 3000e-6
    C2: float = 3500e-6
    R_d: float = 0.02          # equivalent damping of the bridge + L2 path
    R_s: float = 0.4           # DC-link source resistance
    f_s: float = 15e3
    R_load: float = 0.01
    duty_loss: bool = False    # leakage duty loss, off: R_d carries the losses

    def __post_init__(self):
        for name in ("n", "L_lk", "L1", "C1", "L2", "C2", "f_s", "R_load"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"plant.{name} must be positive, got {v!r}")
        for name in ("R_d", "R_s"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"plant.{name} must be non-negative, got {v!r}")

    @staticmethod
    def psfb_damping(n: float, L_lk: float, f_s: float) -> float:
        """Textbook PSFB equivalent resistance 4*n^2*L_lk*f_s."""
        return 4.0 * n * n * L_lk * f_s

    def per_module(self, n_modules: int) -> "PlantParams":
        """Parameters of one module carrying 1/N of a bus of load R_load."""
        return replace(self, R_load=self.R_load * n_modules)


@dataclass
class ModuleState:
    i_L1: float = 0.0
    u_C1: float = 0.0
    i_L2: float = 0.0


@dataclass
class BusModel:
    C_bus: float
    R_load: float
    u_bus: float = 0.0


# ---------------------------------------------------------------------------
# compiled core

@njit(cache=True)
def _envelope(t, peak, omega, half):
    th = (omega * t + half) % (2.0 * half) - half
    return peak * math.cos(th)


@njit(cache=True)
def _duty_eff(D, iL2, uC1, n, loss_k):
    # loss_k = 4*L_lk*f_s, zero when the duty-loss path is disabled
    if loss_k == 0.0:
        return D
    if uC1 <= 0.0:
        return 0.0
    dD = loss_k * max(iL2, 0.0) / (n * uC1)
    return max(0.0, D - dD)


@njit(cache=True)
def _module_rhs(iL1, uC1, iL2, ubus, D_eff, ur, L1, C1, L2, Rs, Rd, n, ideal_link):
    if ideal_link:
        d1 = 0.0
        d2 = 0.0
    else:
        d1 = (ur - uC1 - Rs * iL1) / L1
        if iL1 <= 0.0 and d1 < 0.0:
            d1 = 0.0
        d2 = (iL1 - D_eff * n * iL2) / C1
    d3 = (D_eff * n * uC1 - ubus - Rd * iL2) / L2
    if iL2 <= 0.0 and d3 < 0.0:
        d3 = 0.0          # secondary rectifier blocks reverse current
    return d1, d2, d3


@njit(cache=True)
def _rhs(x, t, out, D, L1, C1, L2, Rs, Rd, n, loss_k, C_bus, R_load,
         peak, omega, half, ideal_link):
    N = D.shape[0]
    ubus = x[3 * N]
    ur = _envelope(t, peak, omega, half)
    i_sum = 0.0
    p_in = 0.0
    p_rs = 0.0
    p_rd = 0.0
    for k in range(N):
        iL1 = x[k]
        uC1 = x[N + k]
        iL2 = x[2 * N + k]
        De = _duty_eff(D[k], iL2, uC1, n[k], loss_k)
        d1, d2, d3 = _module_rhs(iL1, uC1, iL2, ubus, De, ur, L1[k], C1[k], L2[k],
                                 Rs[k], Rd[k], n[k], ideal_link)
        out[k] = d1
        out[N + k] = d2
        out[2 * N + k] = d3
        i_sum += iL2
        if ideal_link:
            p_in += De * n[k] * uC1 * iL2
        else:
            p_in += ur * iL1
            p_rs += Rs[k] * iL1 * iL1
        p_rd += Rd[k] * iL2 * iL2
    out[3 * N] = (i_sum - ubus / R_load) / C_bus
    # energy accumulators: input, load, source resistance, bridge damping
    out[3 * N + 1] = p_in
    out[3 * N + 2] = ubus * ubus / R_load
    out[3 * N + 3] = p_rs
    out[3 * N + 4] = p_rd


@njit(cache=True)
def advance(x, t, dt, nsteps, D, L1, C1, L2, Rs, Rd, n, loss_k, C_bus, R_load,
            peak, omega, half, ideal_link):
    """RK4 over ``nsteps`` plant steps with duty vector D held.

    State layout: [i_L1 (N), u_C1 (N), i_L2 (N), u_bus, E_in, E_load, E_Rs, E_Rd].
    Returns the index of the first non-finite state, or -1.
    """
    m = x.shape[0]
    N = D.shape[0]
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    tmp = np.empty(m)
    for s in range(nsteps):
        ts = t + s * dt
        _rhs(x, ts, k1, D, L1, C1, L2, Rs, Rd, n, loss_k, C_bus, R_load, peak, omega, half, ideal_link)
        for i in range(m):
            tmp[i] = x[i] + 0.5 * dt * k1[i]
        _rhs(tmp, ts + 0.5 * dt, k2, D, L1, C1, L2, Rs, Rd, n, loss_k, C_bus, R_load, peak, omega, half, ideal_link)
        for i in range(m):
            tmp[i] = x[i] + 0.5 * dt * k2[i]
        _rhs(tmp, ts + 0.5 * dt, k3, D, L1, C1, L2, Rs, Rd, n, loss_k, C_bus, R_load, peak, omega, half, ideal_link)
        for i in range(m):
            tmp[i] = x[i] + dt * k3[i]
        _rhs(tmp, ts + dt, k4, D, L1, C1, L2, Rs, Rd, n, loss_k, C_bus, R_load, peak, omega, half, ideal_link)
        for i in range(m):
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        for k in range(N):
            if x[k] < 0.0:
                x[k] = 0.0
            if x[2 * N + k] < 0.0:
                x[2 * N + k] = 0.0
        for i in range(m):
            if not math.isfinite(x[i]):
                return i
    return -1


# ---------------------------------------------------------------------------
# pure helpers

def rectified_voltage(t: float, grid: GridParams) -> float:
    if t < 0:
        raise ValueError("t must be non-negative")
    return float(_envelope(float(t), grid.peak, grid.omega, math.pi / grid.m))


def _envelope_moment(grid: GridParams, harmonic: float, fn) -> float:
    T = grid.ripple_period
    half = math.pi / grid.m
    w = 2.0 * math.pi * harmonic * grid.f_grid

    def f(t):
        return _envelope(t, grid.peak, grid.omega, half) * fn(w * t)
    # kink of the envelope sits at T/2 for the chosen phase
    val, _ = integrate.quad(f, 0.0, T, points=[0.5 * T], limit=200,
                            epsabs=1e-12, epsrel=1e-12)
    return val / T


def rectifier_mean(grid: GridParams) -> float:
    """Mean of the envelope by quadrature."""
    return _envelope_moment(grid, 0.0, lambda _x: 1.0)


def ripple_fourier_coefficient(grid: GridParams, k: int) -> float:
    """|b_n| of the envelope at n = m*k, by quadrature over one ripple period."""
    if int(k) != k or k < 1:
        raise ValueError("harmonic index k must be a positive integer")
    n = grid.m * k
    a = 2.0 * _envelope_moment(grid, n, math.cos)
    b = 2.0 * _envelope_moment(grid, n, math.sin)
    return math.hypot(a, b)


def effective_duty(D: float, i_L2: float, u_C1: float, p: PlantParams) -> float:
    """PSFB duty after leakage-inductance duty loss (identity when disabled)."""
    if not 0.0 <= D <= 1.0:
        raise ValueError("D must lie in [0, 1]")
    if not p.duty_loss:
        return float(D)
    if u_C1 <= 0.0:
        log.warning("effective_duty: u_C1=%g <= 0, bridge output forced to zero", u_C1)
        return 0.0
    return float(_duty_eff(D, i_L2, u_C1, p.n, 4.0 * p.L_lk * p.f_s))


def module_derivatives(s: ModuleState, bus: BusModel, D_eff: float, t: float,
                       p: PlantParams, g: GridParams) -> tuple[float, float, float]:
    """(di_L1/dt, du_C1/dt, di_L2/dt) for one module against the bus voltage."""
    vals = (s.i_L1, s.u_C1, s.i_L2, bus.u_bus, D_eff, t)
    if not all(math.isfinite(v) for v in vals):
        raise FloatingPointError(f"non-finite input to module_derivatives: {vals}")
    if not 0.0 <= D_eff <= 1.0:
        raise ValueError("D_eff must lie in [0, 1]")
    ur = rectified_voltage(t, g)
    return _module_rhs(s.i_L1, s.u_C1, s.i_L2, bus.u_bus, D_eff, ur,
                       p.L1, p.C1, p.L2, p.R_s, p.R_d, p.n, False)


def bus_derivative(bus: BusModel, i_in: float) -> float:
    return (i_in - bus.u_bus / bus.R_load) / bus.C_bus


def g_uod(p: PlantParams, U_i: float) -> RationalTf:
    """Duty -> output voltage, second-order buck-like form with load R_1 = p.R_load."""
    R1 = p.R_load
    return RationalTf([p.n * U_i],
                      [p.R_d / R1 + 1.0, p.L2 / R1 + p.R_d * p.C2, p.L2 * p.C2])


def g_iod(p: PlantParams, U_i: float) -> RationalTf:
    """Duty -> output current, g_uod / R_1."""
    return g_uod(p, U_i).scale(1.0 / p.R_load)
