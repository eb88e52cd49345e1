"""Capacity of the causal error/erasure channel and its closed-form special cases."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import REGION_TOL, ChannelParams
from .qmath import q_entropy

__all__ = [
    "CapacityResult",
    "ChannelParams",
    "alpha_q",
    "rate_term",
    "rate_term_array",
    "capacity",
    "capacity_of",
    "grid_oracle",
    "special_case_capacity",
]

SCAN_POINTS = 1024
GOLDEN_TOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CapacityResult:
    value: float
    argmin_pbar: float
    zero_region: bool


def alpha_q(pbar: float, q: int, p: float, p_star: float = 0.0) -> float:
    """Effective fraction of the block left after the adversary's heavy phase.

    alpha = 1 - (2q/(q-1)) (p - pbar) - (q/(q-1)) p*.
    """
    k = q / (q - 1.0)
    return 1.0 - 2.0 * k * (p - pbar) - k * p_star


def rate_term_array(pbar: np.ndarray, q: int, p: float, p_star: float = 0.0) -> np.ndarray:
    """Vectorised rate term; excluded points come back as NaN."""
    pbar = np.asarray(pbar, dtype=float)
    k = q / (q - 1.0)
    a = 1.0 - 2.0 * k * (p - pbar) - k * p_star
    top = 1.0 - 1.0 / q
    out = np.full(pbar.shape, np.nan)
    pos = a > 0
    ratio = np.zeros_like(pbar)
    ratio[pos] = pbar[pos] / a[pos]
    ok = pos & (ratio <= top + REGION_TOL)
    if np.any(ok):
        out[ok] = a[ok] * (1.0 - q_entropy(np.minimum(ratio[ok], top), q))
    return out


def rate_term(pbar: float, q: int, p: float, p_star: float = 0.0) -> float | None:
    """alpha (1 - H_q(pbar/alpha)), or None when that point is excluded."""
    a = alpha_q(pbar, q, p, p_star)
    if a <= 0:
        return None
    ratio = pbar / a
    top = 1.0 - 1.0 / q
    if ratio > top + REGION_TOL:
        return None
    return a * (1.0 - q_entropy(min(ratio, top), q))


def _in_zero_region(q: int, p: float, p_star: float) -> bool:
    c = (q - 1.0) / q
    return p > c / 2 + REGION_TOL or p_star > c + REGION_TOL or p + p_star > c + REGION_TOL


def _golden(f, lo: float, hi: float, tol: float = GOLDEN_TOL) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def capacity(q: int, p: float, p_star: float = 0.0) -> CapacityResult:
    """Minimise the rate term over pbar in [0, p].

    A 1024-point scan brackets the minimum, then golden-section search
    narrows it to 1e-10 in pbar.
    """
    if _in_zero_region(q, p, p_star):
        return CapacityResult(0.0, 0.0, True)
    c = (q - 1.0) / q
    # The rate term vanishes at pbar0 = 2p + p* - (q-1)/q, where pbar/alpha hits 1 - 1/q.
    pbar0 = 2 * p + p_star - c
    if pbar0 >= -REGION_TOL:
        return CapacityResult(0.0, min(max(pbar0, 0.0), p), False)
    if p == 0:
        v = rate_term(0.0, q, p, p_star)
        return CapacityResult(max(0.0, v), 0.0, False)

    grid = np.linspace(0.0, p, SCAN_POINTS)
    vals = rate_term_array(grid, q, p, p_star)
    feasible = ~np.isnan(vals)
    if not np.any(feasible):
        return CapacityResult(0.0, 0.0, False)
    vals = np.where(feasible, vals, np.inf)
    i = int(np.argmin(vals))
    best_x, best_v = float(grid[i]), float(vals[i])
    lo = float(grid[max(i - 1, 0)])
    hi = float(grid[min(i + 1, SCAN_POINTS - 1)])

    def f(x: float) -> float:
        v = rate_term(x, q, p, p_star)
        return math.inf if v is None else v

    x, v = _golden(f, lo, hi)
    if v < best_v:
        best_x, best_v = x, v
    for end in (0.0, p):
        ve = f(end)
        if ve < best_v:
            best_x, best_v = end, ve
    return CapacityResult(min(1.0, max(0.0, best_v)), best_x, False)


def capacity_of(params: ChannelParams) -> CapacityResult:
    return capacity(params.q, params.p, params.p_star)


def grid_oracle(q: int, p: float, p_star: float = 0.0, points: int = 10**6,
                block: int = 250_000) -> tuple[float, float]:
    """Brute-force minimum of the rate term on a uniform grid of ``points`` values.

    Independent of the bracketing search; used to check it.
    """
    if _in_zero_region(q, p, p_star):
        return 0.0, 0.0
    best_v, best_x = math.inf, 0.0
    for start in range(0, points, block):
        idx = np.arange(start, min(points, start + block))
        xs = p * idx / (points - 1) if points > 1 else np.zeros(1)
        vals = rate_term_array(xs, q, p, p_star)
        vals = np.where(np.isnan(vals), np.inf, vals)
        j = int(np.argmin(vals))
        if vals[j] < best_v:
            best_v, best_x = float(vals[j]), float(xs[j])
    if not math.isfinite(best_v):
        return 0.0, 0.0
    return max(0.0, best_v), best_x


def special_case_capacity(kind: str, q: int, p: float = 0.0, p_star: float = 0.0) -> float:
    """Closed forms: ``erasure_only`` 1-(q/(q-1))p*, ``error_only`` (p*=0), ``large_q`` 1-2p-p*."""
    if kind == "erasure_only":
        return max(0.0, 1.0 - q / (q - 1.0) * p_star)
    if kind == "error_only":
        return capacity(q, p, 0.0).value
    if kind == "large_q":
        return max(0.0, 1.0 - 2.0 * p - p_star)
    raise ValueError(f"unknown special case {kind!r}")
