"""PI baseline, LADRC / A-LADRC and the duty-cycle compensation loop.

The scalar functions below are the reference implementations.  The engine
drives many modules at once through ``LadrcBank`` and ``PiBank``, which use
the same gain formulas.

LADRC discretization: between two samples the observer ODE is integrated
with the PD law substituted for u and with y and r interpolated linearly,
then the law is evaluated on the new estimate and held.  Integrating with u
held instead adds close to half a sample of phase lag (several degrees at
f_s/20), which pulls the loop away from the closed-form controller.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

log = logging.getLogger(__name__)

D_MAX = 0.95


@dataclass(frozen=True)
class LadrcParams:
    wc0: float = 400.0
    w0: float = 2800.0
    b0: float = 1.0
    k_s: float = 100.0
    i_c: float = 30.0
    hysteresis: float = 2.0

    def __post_init__(self):
        if not self.wc0 > 0 or not self.w0 > 0:
            raise ValueError("bandwidths must be positive")
        if self.w0 < self.wc0:
            raise ValueError(f"observer bandwidth w0={self.w0} is below controller bandwidth wc0={self.wc0}")
        if self.b0 == 0:
            raise ValueError("b0 must be nonzero")
        if self.k_s < 0 or self.wc0 - 2 * self.k_s <= 0:
            raise ValueError("need k_s >= 0 and wc0 - 2*k_s > 0")
        if self.hysteresis < 0:
            raise ValueError("hysteresis must be non-negative")
        if not 4 * self.wc0 <= self.w0 <= 10 * self.wc0:
            log.warning("w0/wc0 = %.2f outside the usual 4..10 range", self.w0 / self.wc0)


@dataclass(frozen=True)
class LadrcState:
    z1: float
    z2: float
    z3: float
    b1: float
    b2: float
    b3: float
    kp: float
    kd: float
    b0: float
    wc: float
    w0: float

    @classmethod
    def initial(cls, wc: float, w0: float, b0: float, z1: float = 0.0) -> "LadrcState":
        kp, kd = pd_gains(wc)
        b1, b2, b3 = leso_gains(w0)
        return cls(z1, 0.0, 0.0, b1, b2, b3, kp, kd, b0, wc, w0)


@dataclass
class PiState:
    kp_pi: float
    ki_pi: float
    integral: float = 0.0
    lo: float = 0.0
    hi: float = D_MAX


@dataclass(frozen=True)
class CompParams:
    k_w: float = 0.01
    i_ref: float = 8000.0
    limit: float = 0.05

    def __post_init__(self):
        if not self.i_ref > 0:
            raise ValueError("compensation reference must be positive")
        if self.limit < 0:
            raise ValueError("compensation limit must be non-negative")


def pd_gains(wc: float) -> tuple[float, float]:
    if not wc > 0:
        raise ValueError("wc must be positive")
    return wc * wc, 2.0 * wc


def leso_gains(w0: float) -> tuple[float, float, float]:
    if not w0 > 0:
        raise ValueError("w0 must be positive")
    return 3.0 * w0, 3.0 * w0 * w0, w0 ** 3


def _leso_rhs(st: LadrcState, z: np.ndarray, y: float, u: float) -> np.ndarray:
    e = y - z[0]
    return np.array([st.b1 * e + z[1], st.b2 * e + z[2] + st.b0 * u, st.b3 * e])


def leso_update(st: LadrcState, y: float, u: float, dt: float) -> LadrcState:
    """One RK4 step of the observer with y and u held over dt."""
    if not (math.isfinite(y) and math.isfinite(u)):
        raise FloatingPointError(f"non-finite observer input y={y!r} u={u!r} (z={st.z1, st.z2, st.z3})")
    z = np.array([st.z1, st.z2, st.z3])
    k1 = _leso_rhs(st, z, y, u)
    k2 = _leso_rhs(st, z + 0.5 * dt * k1, y, u)
    k3 = _leso_rhs(st, z + 0.5 * dt * k2, y, u)
    k4 = _leso_rhs(st, z + dt * k3, y, u)
    z = z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return replace(st, z1=float(z[0]), z2=float(z[1]), z3=float(z[2]))


def ladrc_law(st: LadrcState, r: float) -> float:
    """Unclamped u = (kp(r - z1) - kd*z2 - z3)/b0."""
    if st.b0 == 0:
        raise ValueError("b0 must be nonzero")
    return (st.kp * (r - st.z1) - st.kd * st.z2 - st.z3) / st.b0


def ladrc_duty(st: LadrcState, r: float, limits: tuple[float, float] = (0.0, D_MAX)) -> float:
    return min(max(ladrc_law(st, r), limits[0]), limits[1])


def adaptive_bandwidth(i_o: float, p: LadrcParams, prev_region: int | None = None) -> tuple[float, int]:
    """Bandwidth switch wc = wc0 + k_s*(sign(i_o - i_c) - 1).

    With p.hysteresis > 0 the region only changes once i_o leaves the band
    i_c +- hysteresis/2; inside the band the previous region is kept.
    """
    d = float(i_o) - p.i_c
    h = 0.5 * p.hysteresis
    if h == 0 or prev_region is None:
        region = (d > 0) - (d < 0)
    elif d > h:
        region = 1
    elif d < -h:
        region = -1
    else:
        region = prev_region
    return p.wc0 + p.k_s * (region - 1), region


def refresh_gains(st: LadrcState, wc: float) -> LadrcState:
    if wc == st.wc:
        return st
    kp, kd = pd_gains(wc)
    return replace(st, kp=kp, kd=kd, wc=wc)


def duty_compensation(i_o: float, c: CompParams) -> float:
    """D_c = clamp(k_w*(i_ref - i_o)/i_ref, +-limit)."""
    if not c.i_ref > 0:
        raise ValueError("compensation reference must be positive")
    dc = c.k_w * (c.i_ref - i_o) / c.i_ref
    return min(max(dc, -c.limit), c.limit)


def total_duty(D_L: float, D_c: float, limits: tuple[float, float] = (0.0, D_MAX)) -> float:
    return min(max(D_L + D_c, limits[0]), limits[1])


def pi_step(st: PiState, error: float, dt: float) -> float:
    """PI with conditional integration as anti-windup."""
    u = st.kp_pi * error + st.ki_pi * st.integral
    if not ((u >= st.hi and error > 0) or (u <= st.lo and error < 0)):
        st.integral += error * dt
    u = st.kp_pi * error + st.ki_pi * st.integral
    return min(max(u, st.lo), st.hi)


# ---------------------------------------------------------------------------
# banks used by the engine (one row per module)

@njit(cache=True)
def _law(z1, z2, z3, r, kp, kd, b0, extra, lo, hi):
    u = (kp * (r - z1) - kd * z2 - z3) / b0 + extra
    return min(max(u, lo), hi)


@njit(cache=True)
def _observer_tick(z, y0, y1, r0, r1, extra, kp, kd, b1, b2, b3, b0, lo, hi, dt, nsub, out):
    """Advance every module's observer across one control period.

    y and r are interpolated linearly from (y0, r0) to (y1, r1); the applied
    duty inside the interval is the clamped law plus ``extra`` (the known
    compensation term).  ``out`` receives the law output at the end, without
    ``extra``.
    """
    N = z.shape[0]
    h = dt / nsub
    for k in range(N):
        a1 = z[k, 0]
        a2 = z[k, 1]
        a3 = z[k, 2]
        for j in range(nsub):
            fa = j / nsub
            fb = (j + 1.0) / nsub
            fm = 0.5 * (fa + fb)
            ya = y0[k] + (y1[k] - y0[k]) * fa
            ym = y0[k] + (y1[k] - y0[k]) * fm
            yb = y0[k] + (y1[k] - y0[k]) * fb
            ra = r0[k] + (r1[k] - r0[k]) * fa
            rm = r0[k] + (r1[k] - r0[k]) * fm
            rb = r0[k] + (r1[k] - r0[k]) * fb
            # stage 1
            e = ya - a1
            u = _law(a1, a2, a3, ra, kp[k], kd[k], b0[k], extra[k], lo, hi)
            k11 = b1 * e + a2
            k12 = b2 * e + a3 + b0[k] * u
            k13 = b3 * e
            # stage 2
            c1 = a1 + 0.5 * h * k11
            c2 = a2 + 0.5 * h * k12
            c3 = a3 + 0.5 * h * k13
            e = ym - c1
            u = _law(c1, c2, c3, rm, kp[k], kd[k], b0[k], extra[k], lo, hi)
            k21 = b1 * e + c2
            k22 = b2 * e + c3 + b0[k] * u
            k23 = b3 * e
            # stage 3
            c1 = a1 + 0.5 * h * k21
            c2 = a2 + 0.5 * h * k22
            c3 = a3 + 0.5 * h * k23
            e = ym - c1
            u = _law(c1, c2, c3, rm, kp[k], kd[k], b0[k], extra[k], lo, hi)
            k31 = b1 * e + c2
            k32 = b2 * e + c3 + b0[k] * u
            k33 = b3 * e
            # stage 4
            c1 = a1 + h * k31
            c2 = a2 + h * k32
            c3 = a3 + h * k33
            e = yb - c1
            u = _law(c1, c2, c3, rb, kp[k], kd[k], b0[k], extra[k], lo, hi)
            k41 = b1 * e + c2
            k42 = b2 * e + c3 + b0[k] * u
            k43 = b3 * e
            a1 += h / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
            a2 += h / 6.0 * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
            a3 += h / 6.0 * (k13 + 2.0 * k23 + 2.0 * k33 + k43)
        z[k, 0] = a1
        z[k, 1] = a2
        z[k, 2] = a3
        out[k] = _law(a1, a2, a3, r1[k], kp[k], kd[k], b0[k], 0.0, lo, hi)


class LadrcBank:
    """LADRC (optionally adaptive) for N modules sharing one sample clock."""

    def __init__(self, n: int, p: LadrcParams, dt: float, adaptive: bool,
                 d_max: float = D_MAX, nsub: int = 4, b0: np.ndarray | None = None):
        self.n = n
        self.p = p
        self.dt = dt
        self.adaptive = adaptive
        self.lo, self.hi = 0.0, d_max
        self.nsub = nsub
        self.b1, self.b2, self.b3 = leso_gains(p.w0)
        self.b0 = np.full(n, p.b0) if b0 is None else np.asarray(b0, float)
        self.z = np.zeros((n, 3))
        self.region: int | None = None
        self.wc = p.wc0 if not adaptive else p.wc0 - 2 * p.k_s
        kp, kd = pd_gains(self.wc)
        self.kp = np.full(n, kp)
        self.kd = np.full(n, kd)
        self.out = np.zeros(n)
        self._prev: tuple[np.ndarray, np.ndarray] | None = None

    def step(self, y: np.ndarray, r: np.ndarray, extra: np.ndarray, i_o_total: float) -> np.ndarray:
        if self._prev is None:
            self.z[:, 0] = y
        else:
            y0, r0 = self._prev
            _observer_tick(self.z, y0, y, r0, r, extra, self.kp, self.kd, self.b1, self.b2,
                           self.b3, self.b0, self.lo, self.hi, self.dt, self.nsub, self.out)
        if self.adaptive:
            wc, self.region = adaptive_bandwidth(i_o_total, self.p, self.region)
            if wc != self.wc:
                self.wc = wc
                kp, kd = pd_gains(wc)
                self.kp[:] = kp
                self.kd[:] = kd
        for k in range(self.n):
            self.out[k] = _law(self.z[k, 0], self.z[k, 1], self.z[k, 2], r[k], self.kp[k],
                               self.kd[k], self.b0[k], 0.0, self.lo, self.hi)
        self._prev = (y.copy(), r.copy())
        return self.out.copy()

    def diagnostics(self) -> dict:
        return {"wc": self.wc, "z_mean": self.z.mean(axis=0).tolist(), "duty": self.out.tolist()}


class PiBank:
    def __init__(self, n: int, kp: float, ki: float, dt: float, d_max: float = D_MAX):
        self.states = [PiState(kp, ki, 0.0, 0.0, d_max) for _ in range(n)]
        self.dt = dt
        self.wc = math.nan
        self.out = np.zeros(n)

    def step(self, y: np.ndarray, r: np.ndarray, extra: np.ndarray, i_o_total: float) -> np.ndarray:
        for k, st in enumerate(self.states):
            self.out[k] = pi_step(st, float(r[k] - y[k]), self.dt)
        return self.out.copy()

    def diagnostics(self) -> dict:
        return {"integral": [s.integral for s in self.states], "duty": self.out.tolist()}
