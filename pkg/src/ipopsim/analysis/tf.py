"""Rational transfer functions in s and the LADRC closed forms built on them.

Coefficients are stored in ascending powers of s.  No pole-zero cancellation
is ever attempted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg
from scipy.optimize import linear_sum_assignment


def _trim(c: Iterable[float]) -> np.ndarray:
    a = np.asarray(list(c), dtype=float)
    if a.ndim != 1:
        raise ValueError("coefficients must be a flat sequence")
    nz = np.flatnonzero(a)
    if nz.size == 0:
        return np.zeros(1)
    return a[: nz[-1] + 1].copy()


def _horner(c: np.ndarray, s: complex) -> complex:
    acc = 0j
    for v in c[::-1]:
        acc = acc * s + v
    return acc


def _polymul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)


def _polyadd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros(max(a.size, b.size))
    out[: a.size] += a
    out[: b.size] += b
    return out


class RationalTf:
    """num(s)/den(s), coefficients ascending."""

    __slots__ = ("num", "den")

    def __init__(self, num: Sequence[float], den: Sequence[float]):
        self.num = _trim(num)
        self.den = _trim(den)
        if not np.any(self.den):
            raise ValueError("zero denominator polynomial")
        if not (np.all(np.isfinite(self.num)) and np.all(np.isfinite(self.den))):
            raise ValueError("non-finite coefficient")

    def __repr__(self):
        return f"RationalTf(num={self.num.tolist()}, den={self.den.tolist()})"

    @property
    def order(self) -> int:
        return self.den.size - 1

    def __call__(self, s: complex) -> complex:
        return _horner(self.num, s) / _horner(self.den, s)

    def eval_parts(self, s: complex) -> tuple[complex, complex]:
        return _horner(self.num, s), _horner(self.den, s)

    def scale(self, k: float) -> "RationalTf":
        return RationalTf(self.num * k, self.den)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        return RationalTf(_polymul(self.num, other.num), _polymul(self.den, other.den))

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = RationalTf([float(other)], [1.0])
        num = _polyadd(_polymul(self.num, other.den), _polymul(other.num, self.den))
        return RationalTf(num, _polymul(self.den, other.den))

    def feedback(self, h: "RationalTf | None" = None) -> "RationalTf":
        """G/(1+G*H), H defaults to unity."""
        h = h if h is not None else RationalTf([1.0], [1.0])
        num = _polymul(self.num, h.den)
        den = _polyadd(_polymul(self.den, h.den), _polymul(self.num, h.num))
        return RationalTf(num, den)


def tf_arithmetic(a: RationalTf, b: RationalTf, op: str) -> RationalTf:
    if op == "multiply":
        return a * b
    if op == "add":
        return a + b
    if op == "feedback":
        return a.feedback(b)
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# LADRC closed forms

def controller_tf(kp, kd, b1, b2, b3, b0) -> RationalTf:
    """Equivalent feedback controller of LESO + PD law (y -> -u)."""
    if b0 == 0:
        raise ValueError("b0 must be nonzero")
    num = [kp * b3, kp * b2 + kd * b3, kp * b1 + kd * b2 + b3]
    den = [0.0, b0 * (kd * b1 + kp + b2), b0 * (kd + b1), b0]
    return RationalTf(num, den)


def prefilter_tf(kp, kd, b1, b2, b3) -> RationalTf:
    """Reference prefilter: kp*N(s) over the controller numerator."""
    num = [kp * b3, kp * b2, kp * b1, kp]
    den = [kp * b3, kp * b2 + kd * b3, kp * b1 + kd * b2 + b3]
    return RationalTf(num, den)


def leso_char_poly(b1, b2, b3) -> list[float]:
    """N(s) = s^3 + b1 s^2 + b2 s + b3, ascending."""
    return [b3, b2, b1, 1.0]


def leso_tf_matrix(b1, b2, b3, b0) -> list[list[RationalTf]]:
    """Rows z1..z3, columns (u, y), all over N(s)."""
    N = leso_char_poly(b1, b2, b3)
    return [
        [RationalTf([0.0, b0], N), RationalTf([b3, b2, b1], N)],
        [RationalTf([0.0, b0 * b1, b0], N), RationalTf([0.0, b3, b2], N)],
        [RationalTf([-b0 * b3], N), RationalTf([0.0, 0.0, b3], N)],
    ]


def pi_tf(kp: float, ki: float) -> RationalTf:
    return RationalTf([ki, kp], [0.0, 1.0])


# ---------------------------------------------------------------------------
# frequency response and poles

@dataclass(frozen=True)
class FreqPoint:
    f: float
    magnitude_db: float
    phase_deg: float
    flagged: bool = False   # evaluation landed on a pole


def freq_response(tf: RationalTf, f_list: Sequence[float]) -> list[FreqPoint]:
    vals = []
    flags = []
    for f in f_list:
        s = 2j * math.pi * f
        n, d = tf.eval_parts(s)
        scale = float(np.sum(np.abs(tf.den) * np.abs(s) ** np.arange(tf.den.size)))
        if abs(d) <= 1e-13 * scale:
            vals.append(complex("nan"))
            flags.append(True)
        else:
            vals.append(n / d)
            flags.append(False)
    vals = np.asarray(vals)
    ok = ~np.asarray(flags, dtype=bool)
    phase = np.full(len(vals), math.nan)
    if ok.any():
        phase[ok] = np.degrees(np.unwrap(np.angle(vals[ok])))
    out = []
    for f, v, ph, bad in zip(f_list, vals, phase, flags):
        if bad:
            out.append(FreqPoint(float(f), math.inf, math.nan, True))
        else:
            mag = abs(v)
            out.append(FreqPoint(float(f), 20.0 * math.log10(mag) if mag > 0 else -math.inf,
                                 float(ph)))
    return out


def poly_roots(c_ascending: Sequence[float]) -> np.ndarray:
    """Roots of a real polynomial via a balanced companion matrix."""
    c = _trim(c_ascending)
    deg = c.size - 1
    if deg < 1:
        return np.zeros(0, dtype=complex)
    monic = c[:-1] / c[-1]
    comp = np.zeros((deg, deg))
    comp[1:, :-1] = np.eye(deg - 1)
    comp[:, -1] = -monic
    bal, _ = linalg.matrix_balance(comp, permute=False)
    r = _refine_multiple(c, np.linalg.eigvals(bal))
    return r[np.lexsort((r.imag, r.real))]


def _deriv(c: np.ndarray) -> np.ndarray:
    return c[1:] * np.arange(1, c.size) if c.size > 1 else np.zeros(1)


def _refine_multiple(c: np.ndarray, r: np.ndarray, cluster_tol: float = 1e-3,
                     accept_tol: float = 1e-7) -> np.ndarray:
    """Sharpen clustered eigenvalues that stem from one multiple root.

    A k-fold root comes back from the eigen-solver as k values spread by
    about eps**(1/k).  Their mean is accurate to O(eps); it is then polished
    by Newton on the (k-1)-th derivative, where the root is simple.  The
    cluster is only replaced when the lower derivatives vanish there too.
    """
    r = r.astype(complex)
    n = r.size
    seen = np.zeros(n, bool)
    for i in range(n):
        if seen[i]:
            continue
        scale = max(abs(r[i]), 1e-300)
        idx = [j for j in range(n) if not seen[j] and abs(r[j] - r[i]) <= cluster_tol * scale]
        seen[idx] = True
        k = len(idx)
        if k < 2:
            continue
        ders = [c]
        for _ in range(k - 1):
            ders.append(_deriv(ders[-1]))
        q, dq = ders[-1], _deriv(ders[-1])
        m = complex(np.mean(r[idx]))
        for _ in range(8):
            dv = _horner(dq, m)
            if dv == 0:
                break
            step = _horner(q, m) / dv
            m -= step
            if abs(step) <= 1e-16 * abs(m):
                break
        ok = True
        for p in ders[:-1]:
            mag = float(np.sum(np.abs(p) * abs(m) ** np.arange(p.size)))
            if abs(_horner(p, m)) > accept_tol * mag:
                ok = False
                break
        if ok:
            if abs(m.imag) <= 1e-12 * abs(m):
                m = complex(m.real, 0.0)
            r[idx] = m
    return r


def poles(tf: RationalTf) -> np.ndarray:
    if tf.order < 1:
        raise ValueError("denominator degree must be at least 1")
    return poly_roots(tf.den)


@dataclass(frozen=True)
class StabilityResult:
    stable: bool
    poles: np.ndarray
    degenerate: bool = False


def closed_loop_char_poly(open_loop: RationalTf) -> np.ndarray:
    return _trim(_polyadd(open_loop.den, open_loop.num))


def stability_check(open_loop: RationalTf) -> StabilityResult:
    """Poles of 1 + G_k; stable iff every real part is negative."""
    cp = closed_loop_char_poly(open_loop)
    if not np.any(cp):
        return StabilityResult(False, np.zeros(0, dtype=complex), degenerate=True)
    p = poly_roots(cp)
    return StabilityResult(bool(np.all(p.real < 0)), p)


def root_locus(open_loop: RationalTf, gains: Sequence[float]) -> np.ndarray:
    """Closed-loop poles of 1 + k*G_k for each k, columns paired by continuity."""
    rows = []
    prev = None
    for k in gains:
        p = poly_roots(_polyadd(open_loop.den, k * open_loop.num))
        if prev is not None and p.size == prev.size:
            cost = np.abs(prev[:, None] - p[None, :])
            _, col = linear_sum_assignment(cost)
            p = p[col]
        rows.append(p)
        prev = p
    return np.vstack(rows)
