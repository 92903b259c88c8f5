"""Hierarchical delay current sharing: reference split and two-level delay schedule."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Topology:
    x: int = 3   # modules per group
    y: int = 4   # groups (unit controllers)

    def __post_init__(self):
        if int(self.x) != self.x or int(self.y) != self.y or self.x < 1 or self.y < 1:
            raise ValueError("topology x and y must be positive integers")

    @property
    def n_modules(self) -> int:
        return self.x * self.y

    def index(self, group: int, member: int) -> int:
        return group * self.x + member


@dataclass(frozen=True)
class DelaySchedule:
    T_m: float
    t_d1: float
    t_d2: float
    module_delays: tuple[float, ...]   # indexed group-major: module g*x + k


def first_stage_delays(T_m: float, x: int) -> list[float]:
    if x < 1:
        raise ValueError("x must be >= 1")
    if T_m <= 0:
        raise ValueError("T_m must be positive")
    return [i * T_m / x for i in range(x)]


def second_stage_delays(t_d1: float, y: int) -> list[float]:
    if y < 1:
        raise ValueError("y must be >= 1")
    if t_d1 <= 0:
        raise ValueError("t_d1 must be positive")
    return [j * t_d1 / y for j in range(y)]


def build_schedule(topo: Topology, f_grid: float, m: int = 6) -> DelaySchedule:
    T_m = 1.0 / (m * f_grid)
    t_in = first_stage_delays(T_m, topo.x)
    t_d1 = T_m / topo.x
    tau = second_stage_delays(t_d1, topo.y)
    delays = tuple(tau[g] + t_in[k] for g in range(topo.y) for k in range(topo.x))
    return DelaySchedule(T_m, t_d1, t_d1 / topo.y, delays)


def share_reference(i_ref_total: float, topo: Topology,
                    active: Sequence[bool] | None = None) -> np.ndarray:
    """Equal split across active modules; inactive modules get zero."""
    mask = np.ones(topo.n_modules, bool) if active is None else np.asarray(active, bool)
    if mask.shape != (topo.n_modules,):
        raise ValueError("active mask length must equal the module count")
    count = int(mask.sum())
    if count == 0:
        raise ValueError("at least one module must be active")
    return np.where(mask, i_ref_total / count, 0.0)


def cancellation_factor(delays: Sequence[float], T_m: float, k: int = 1) -> float:
    """|mean of exp(-j*2*pi*k*d/T_m)| over the given delays."""
    if k < 1:
        raise ValueError("harmonic index k must be >= 1")
    acc = sum(cmath.exp(-2j * math.pi * k * d / T_m) for d in delays)
    return abs(acc) / len(delays)


def interleave_cancellation_factor(x: int, y: int, k: int) -> float:
    sched = build_schedule(Topology(x, y), 50.0, 6)   # result is independent of T_m
    val = cancellation_factor(sched.module_delays, sched.T_m, k)
    return 0.0 if val < 1e-12 else val
