"""Scalar figures extracted from traces: settling, ripple, sag, tone."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..engine import Trace


@dataclass(frozen=True)
class Metrics:
    settling_time: float = 0.0
    ripple_pp: float = 0.0
    sag_depth: float = 0.0
    sag_duration: float = 0.0
    tone_amp: float = 0.0
    tone_freq: float = 0.0

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def settling_time(trace: Trace, target: float, band: float = 0.02) -> float:
    """First time after which the trace stays inside target*(1 +- band)."""
    if not 0 < band < 0.5:
        raise ValueError("band must lie in (0, 0.5)")
    x = trace.samples
    tol = abs(target) * band
    outside = np.flatnonzero(np.abs(x - target) > tol)
    if outside.size == 0:
        return 0.0
    last = outside[-1]
    if last == x.size - 1:
        return math.inf
    return trace.t0 + (last + 1) * trace.dt


def ripple_pp(trace: Trace, window: float) -> float:
    """max - min over the trailing window."""
    n = int(round(window / trace.dt)) + 1
    if window <= 0 or n > len(trace):
        raise ValueError(f"window {window} s does not fit in trace {trace.name!r}")
    tail = trace.samples[-n:]
    return float(tail.max() - tail.min())


def sag_metrics(trace: Trace, event_t: float, pre_level: float,
                recovery_band: float = 0.02) -> tuple[float, float]:
    """(depth, duration) of the dip that follows event_t."""
    t_last = trace.t0 + (len(trace) - 1) * trace.dt
    if not trace.t0 <= event_t <= t_last:
        raise ValueError("event_t outside trace")
    i0 = int(math.ceil((event_t - trace.t0) / trace.dt - 1e-9))
    after = trace.samples[i0:]
    depth = max(0.0, float(pre_level - after.min()))
    outside = np.flatnonzero(np.abs(after - pre_level) > abs(pre_level) * recovery_band)
    if outside.size == 0:
        return depth, 0.0
    last = outside[-1]
    if last == after.size - 1:
        return depth, math.inf
    duration = trace.t0 + (i0 + last + 1) * trace.dt - event_t
    return depth, duration


def tone_amplitude(trace: Trace, f: float, window: float | None = None) -> float:
    """Single-bin DFT amplitude at f over the largest whole number of periods.

    The window is taken from the end of the trace (or of the trailing
    ``window`` seconds when given).
    """
    if f <= 0:
        raise ValueError("frequency must be positive")
    x = trace.samples
    if window is not None:
        x = x[-(int(round(window / trace.dt)) + 1):]
    periods = math.floor(x.size * trace.dt * f + 1e-9)
    if periods < 3:
        raise ValueError("trace shorter than three periods of f")
    n = int(round(periods / (f * trace.dt)))
    n = min(n, x.size)
    seg = x[-n:]
    t = np.arange(n) * trace.dt
    proj = np.dot(seg, np.exp(-2j * math.pi * f * t))
    return float(2.0 * abs(proj) / n)
