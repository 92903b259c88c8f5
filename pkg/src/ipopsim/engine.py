"""Fixed-step integration, delay lines and the closed-loop simulation loop."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

import numpy as np

if TYPE_CHECKING:
    from .scenario import Scenario


class SimulationAbort(RuntimeError):
    """Raised when the integration produces non-finite or runaway states."""

    def __init__(self, message: str, t: float | None = None, diagnostics: dict | None = None):
        super().__init__(message)
        self.t = t
        self.diagnostics = diagnostics or {}


@dataclass
class SimClock:
    dt_plant: float
    dt_ctrl: float
    t_end: float
    t: float = 0.0

    def __post_init__(self):
        if not self.dt_plant > 0 or not self.dt_ctrl > 0:
            raise ValueError("time steps must be positive")
        ratio = self.dt_ctrl / self.dt_plant
        if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
            raise ValueError("dt_ctrl must be an integer multiple of dt_plant")

    @classmethod
    def for_rate(cls, f_s: float, dt_plant: float, t_end: float) -> "SimClock":
        """Snap dt_plant down so a whole number of steps fits one control period."""
        dt_ctrl = 1.0 / f_s
        nsub = max(1, math.ceil(dt_ctrl / dt_plant - 1e-9))
        return cls(dt_ctrl / nsub, dt_ctrl, t_end)

    @property
    def substeps(self) -> int:
        return int(round(self.dt_ctrl / self.dt_plant))

    @property
    def n_ticks(self) -> int:
        return int(math.floor(self.t_end / self.dt_ctrl + 1e-9))


class DelayLine:
    """Sample-synchronous delay of ``round(delay/dt)`` samples."""

    def __init__(self, delay: float, dt: float, fill: float = 0.0):
        if delay < 0:
            raise ValueError("delay must be non-negative")
        self.dt = dt
        self.steps = int(math.floor(delay / dt + 0.5))
        self.requested = delay
        self.delay = self.steps * dt
        self.capacity = self.steps + 1
        self.buffer = np.full(self.capacity, float(fill))
        self._head = 0

    @property
    def quantization_error(self) -> float:
        return self.delay - self.requested

    def step(self, value: float) -> float:
        self.buffer[self._head] = value
        out_idx = (self._head - self.steps) % self.capacity
        out = self.buffer[out_idx]
        self._head = (self._head + 1) % self.capacity
        return float(out)


def delay_read_write(line: DelayLine, value: float, t: float) -> float:
    """Write ``value`` at time t and return what was written at t - delay."""
    return line.step(value)


@dataclass(frozen=True)
class Trace:
    name: str
    t0: float
    dt: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    @property
    def t(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) * self.dt

    def window(self, t_start: float, t_stop: float | None = None) -> "Trace":
        i0 = max(0, int(math.ceil((t_start - self.t0) / self.dt - 1e-9)))
        i1 = self.samples.size if t_stop is None else int(math.floor((t_stop - self.t0) / self.dt + 1e-9)) + 1
        return Trace(self.name, self.t0 + i0 * self.dt, self.dt, self.samples[i0:i1])


def integrate_step(state, derivs: Callable[[float, np.ndarray], np.ndarray], t: float, dt: float) -> np.ndarray:
    """Classical fourth-order Runge-Kutta step."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    x = np.asarray(state, dtype=float)

    def f(tt, xx):
        d = np.asarray(derivs(tt, xx), dtype=float)
        bad = np.flatnonzero(~np.isfinite(d))
        if bad.size:
            raise SimulationAbort(f"non-finite derivative in state index {int(bad[0])} at t={tt:.9g}", tt,
                                  {"state_index": int(bad[0])})
        return d

    k1 = f(t, x)
    k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = f(t + dt, x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# ---------------------------------------------------------------------------
# closed loop

@dataclass
class SimResult:
    traces: dict[str, Trace]
    meta: dict

    def __getitem__(self, name: str) -> Trace:
        return self.traces[name]


def _state_names(n: int) -> list[str]:
    names = [f"m{k + 1:02d}.i_L1" for k in range(n)]
    names += [f"m{k + 1:02d}.u_C1" for k in range(n)]
    names += [f"m{k + 1:02d}.i_L2" for k in range(n)]
    return names + ["u_bus", "E_in", "E_load", "E_Rs", "E_Rd"]


def module_label(k: int) -> str:
    return f"m{k + 1:02d}"


def run_simulation(sc: "Scenario", abort_bound: float = 1e9) -> SimResult:
    """Run one scenario on the control-rate grid and return its traces."""
    from . import plant as pl
    from .control import LadrcBank, PiBank, duty_compensation, CompParams
    from .hdcsc import build_schedule, share_reference

    g = sc.grid
    p = sc.plant
    topo = sc.topology.topology
    N = topo.n_modules
    clock = SimClock.for_rate(p.f_s, sc.clock.dt_plant, sc.clock.t_end)
    dt_c, nsub, n_ticks = clock.dt_ctrl, clock.substeps, clock.n_ticks

    # per-module parameters with mismatch
    rng = np.random.default_rng(sc.seed)
    tol = sc.topology.mismatch
    L2 = p.L2 * (1.0 + rng.uniform(-tol, tol, N)) if tol > 0 else np.full(N, p.L2)
    C2 = p.C2 * (1.0 + rng.uniform(-tol, tol, N)) if tol > 0 else np.full(N, p.C2)
    L1 = np.full(N, p.L1)
    C1 = np.full(N, p.C1)
    Rs = np.full(N, p.R_s)
    Rd = np.full(N, p.R_d)
    nn = np.full(N, p.n)
    loss_k = 4.0 * p.L_lk * p.f_s if p.duty_loss else 0.0
    ideal = sc.plant_ideal_link
    active = np.array(sc.topology.active, dtype=bool)
    C_bus = float(C2[active].sum())

    # initial state
    x = np.zeros(3 * N + 5)
    u_link0 = sc.initial_u_C1 if sc.initial_u_C1 is not None else g.u_d0
    x[N:2 * N] = u_link0
    x[3 * N] = sc.initial_u_o

    # delays
    sched = build_schedule(topo, g.f_grid, g.m)
    if sc.hdcsc.enabled:
        lines = [DelayLine(d, dt_c) for d in sched.module_delays]
    else:
        lines = [DelayLine(0.0, dt_c) for _ in range(N)]

    # controller
    cc = sc.controller
    voltage_mode = cc.mode == "voltage"
    if cc.kind == "pi":
        bank = PiBank(N, cc.kp_pi, cc.ki_pi, dt_c, cc.d_max)
    else:
        b0 = sc.resolved_b0(C2)
        bank = LadrcBank(N, sc.ladrc_params(), dt_c, adaptive=cc.kind == "aladrc",
                         d_max=cc.d_max, nsub=cc.observer_substeps, b0=b0)

    # schedules of discrete events
    load_ev = sorted(sc.load.events)
    ref_ev = sorted(sc.references.steps)
    topo_ev = sorted(sc.topology.events)
    R_now = sc.load.R
    ref_now = sc.references.value
    li = ri = ti = 0

    n_rec = n_ticks + 1
    rec_urect = np.empty(n_rec)
    rec_uC1 = np.empty((n_rec, N))
    rec_D = np.empty((n_rec, N))
    rec_iL2 = np.empty((n_rec, N))
    rec_io = np.empty(n_rec)
    rec_uo = np.empty(n_rec)
    rec_wc = np.empty(n_rec)
    rec_Dc = np.empty(n_rec)

    half = math.pi / g.m
    D = np.zeros(N)
    Dc_applied = np.zeros(N)
    comp_on = sc.compensation.enabled
    delay_total = sc.hdcsc.enabled and sc.hdcsc.apply_to == "duty"
    t = 0.0
    for k in range(n_rec):
        t = k * dt_c
        # events that take effect at this control instant
        while ri < len(ref_ev) and ref_ev[ri][0] <= t + 1e-12:
            ref_now = ref_ev[ri][1]
            ri += 1
        while ti < len(topo_ev) and topo_ev[ti][0] <= t + 1e-12:
            _, mod, state = topo_ev[ti]
            active[mod] = state
            C_bus = float(C2[active].sum())
            ti += 1
        while li < len(load_ev) and load_ev[li][0] <= t + 1e-12:
            R_now = load_ev[li][1]
            li += 1

        u_bus = x[3 * N]
        i_tot = u_bus / R_now
        n_act = int(active.sum())
        rec_urect[k] = pl._envelope(t, g.peak, g.omega, half)
        rec_uC1[k] = x[N:2 * N]
        rec_iL2[k] = x[2 * N:3 * N]
        rec_io[k] = i_tot
        rec_uo[k] = u_bus

        # controller
        if voltage_mode:
            y = np.full(N, u_bus)
            r = np.full(N, ref_now)
            meas, ref_c = u_bus, ref_now
        else:
            y = np.full(N, i_tot / n_act)
            r = share_reference(ref_now, topo, active)
            meas, ref_c = i_tot, ref_now
        D_L = bank.step(y, r, Dc_applied, i_tot)
        if comp_on and ref_c > 0:
            dc = duty_compensation(meas, CompParams(sc.compensation.k_w, ref_c, sc.compensation.limit))
        else:
            dc = 0.0
        if delay_total:
            cmd = np.array([lines[m].step(D_L[m] + dc) for m in range(N)])
            Dc_applied = cmd - D_L
        else:
            Dc_applied = np.array([lines[m].step(dc) for m in range(N)])
            cmd = D_L + Dc_applied
        D = np.clip(cmd, 0.0, cc.d_max)
        D[~active] = 0.0
        rec_D[k] = D
        rec_wc[k] = bank.wc
        rec_Dc[k] = dc
        if k == n_ticks:
            break

        # plant over [t, t + dt_c], split at load events inside the interval
        t_next = (k + 1) * dt_c
        s_done = 0
        while s_done < nsub:
            s_stop = nsub
            R_seg = R_now
            if li < len(load_ev) and load_ev[li][0] < t_next - 1e-12:
                s_ev = int(round((load_ev[li][0] - t) / clock.dt_plant))
                s_ev = min(max(s_ev, s_done), nsub)
                if s_ev > s_done:
                    s_stop = s_ev
                else:
                    R_now = load_ev[li][1]
                    li += 1
                    continue
            bad = pl.advance(x, t + s_done * clock.dt_plant, clock.dt_plant, s_stop - s_done, D,
                             L1, C1, L2, Rs, Rd, nn, loss_k, C_bus, R_seg,
                             g.peak, g.omega, half, ideal)
            if bad >= 0:
                raise SimulationAbort(
                    f"non-finite state {_state_names(N)[bad]} near t={t:.6f} s", t,
                    {"controller": cc.kind, **bank.diagnostics()})
            s_done = s_stop
        big = np.abs(x[:3 * N + 1]).max()
        if big > abort_bound:
            idx = int(np.argmax(np.abs(x[:3 * N + 1])))
            raise SimulationAbort(
                f"state {_state_names(N)[idx]} = {x[idx]:.3g} exceeds bound {abort_bound:g} "
                f"at t={t_next:.6f} s", t_next, {"controller": cc.kind, **bank.diagnostics()})

    traces: dict[str, Trace] = {}

    def add(name, arr):
        traces[name] = Trace(name, 0.0, dt_c, arr)

    add("i_o_total", rec_io)
    add("u_o", rec_uo)
    for m in range(N):
        lab = module_label(m)
        add(f"{lab}.i_o", rec_iL2[:, m])
        add(f"{lab}.D", rec_D[:, m])
        add(f"{lab}.u_i", rec_uC1[:, m])
        add(f"{lab}.u_rect", rec_urect)
    add("omega_c", rec_wc)
    add("D_c", rec_Dc)

    stored = _stored_energy(x, N, L1, C1, L2, C_bus, ideal)
    meta = {
        "dt_plant": clock.dt_plant,
        "dt_ctrl": dt_c,
        "substeps": nsub,
        "n_modules": N,
        "C_bus": C_bus,
        "L2_modules": L2.tolist(),
        "C2_modules": C2.tolist(),
        "delay_steps": [ln.steps for ln in lines],
        "delay_requested": [ln.requested for ln in lines],
        "delay_max_quantization": max(abs(ln.quantization_error) for ln in lines),
        "energy": {"in": x[3 * N + 1], "load": x[3 * N + 2], "R_s": x[3 * N + 3],
                   "R_d": x[3 * N + 4], "stored_final": stored},
        "final_state": x[:3 * N + 1].tolist(),
    }
    return SimResult(traces, meta)


def _stored_energy(x, N, L1, C1, L2, C_bus, ideal) -> float:
    e = 0.5 * float(np.sum(L2 * x[2 * N:3 * N] ** 2)) + 0.5 * C_bus * x[3 * N] ** 2
    if not ideal:
        e += 0.5 * float(np.sum(L1 * x[:N] ** 2 + C1 * x[N:2 * N] ** 2))
    return e
