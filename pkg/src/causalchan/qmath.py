"""Small numeric kernel for q-ary coding arguments.

Entropy is evaluated in double precision; ball volumes and the Plotkin bound
use exact integer arithmetic because they feed combinatorial tests.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np
from scipy.optimize import brentq

ArrayLike = Union[float, np.ndarray]

DOMAIN_TOL = 1e-12


class DomainError(ValueError):
    """Raised when an argument falls outside the domain of a q-ary function."""


def _check_q(q: int) -> None:
    if int(q) != q or q < 2:
        raise DomainError(f"alphabet size must be an integer >= 2, got {q!r}")


def q_entropy(x: ArrayLike, q: int) -> ArrayLike:
    """q-ary entropy function.

    H_q(x) = x log_q(q-1) - x log_q x - (1-x) log_q(1-x), with 0 log 0 = 0.

    Parameters
    ----------
    x : float or ndarray
        Fraction(s) in [0, 1 - 1/q]. Values within 1e-12 of the interval are
        clipped onto it.
    q : int
        Alphabet size, at least 2.

    Returns
    -------
    float or ndarray
        Entropy in [0, 1], same shape as ``x``.
    """
    _check_q(q)
    top = 1.0 - 1.0 / q
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < -DOMAIN_TOL) or np.any(arr > top + DOMAIN_TOL):
        raise DomainError(f"entropy argument outside [0, {top}] for q={q}")
    arr = np.clip(arr, 0.0, top)
    ln_q = math.log(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        xlx = np.where(arr > 0.0, arr * np.log(arr), 0.0)
        one = 1.0 - arr
        ylx = np.where(one > 0.0, one * np.log(one), 0.0)
    h = (arr * math.log(q - 1) - xlx - ylx) / ln_q
    h = np.clip(h, 0.0, 1.0)
    if np.ndim(x) == 0:
        return float(h)
    return h


def q_entropy_inverse(h: float, q: int) -> float:
    """Return the unique x in [0, 1-1/q] with H_q(x) = h."""
    _check_q(q)
    if h < -DOMAIN_TOL or h > 1.0 + DOMAIN_TOL:
        raise DomainError(f"entropy value {h} outside [0, 1]")
    top = 1.0 - 1.0 / q
    if h <= 0.0:
        return 0.0
    if h >= 1.0:
        return top
    return brentq(lambda v: q_entropy(v, q) - h, 0.0, top, xtol=1e-15, rtol=1e-15)


def q_entropy_inverse_array(h, q: int, iters: int = 64) -> np.ndarray:
    """Vectorized inverse by bisection; NaN where h lies outside [0, 1]."""
    _check_q(q)
    h = np.asarray(h, dtype=float)
    bad = (h < -DOMAIN_TOL) | (h > 1.0 + DOMAIN_TOL) | np.isnan(h)
    target = np.clip(np.nan_to_num(h), 0.0, 1.0)
    lo = np.zeros_like(target)
    hi = np.full_like(target, 1.0 - 1.0 / q)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        up = q_entropy(mid, q) < target
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    x = np.where(target >= 1.0, 1.0 - 1.0 / q, np.where(target <= 0.0, 0.0, 0.5 * (lo + hi)))
    return np.where(bad, np.nan, x)


def hamming_ball_volume(n: int, r: int, q: int) -> int:
    """Number of q-ary words of length ``n`` within Hamming distance ``r`` of a point."""
    _check_q(q)
    if not (0 <= r <= n):
        raise DomainError(f"radius must satisfy 0 <= r <= n, got r={r}, n={n}")
    return sum(math.comb(n, i) * (q - 1) ** i for i in range(r + 1))


def plotkin_bound(n: int, d_min: int, q: int) -> int:
    """Largest possible size of a q-ary code with length ``n`` and minimum distance ``d_min``.

    Only valid when d_min > (1 - 1/q) n, where the bound is floor(qd / (qd - (q-1)n)).
    """
    _check_q(q)
    num = q * d_min
    den = q * d_min - (q - 1) * n
    if den <= 0:
        raise DomainError(
            f"Plotkin bound needs d_min > (1-1/q)n; got d_min={d_min}, n={n}, q={q}"
        )
    return num // den


def lemma1_margin(x: float, delta: float, q: int) -> tuple[float, float]:
    """Both sides of the entropy increment bound.

    Returns ``(H_q(x + delta), H_q(x) + (2 sqrt(delta) + delta ln(q-1)) / ln q)``;
    the bound states the first is strictly smaller.
    """
    if not (0.0 < delta < 0.5):
        raise DomainError(f"delta must lie in (0, 1/2), got {delta}")
    lhs = q_entropy(x + delta, q)
    rhs = q_entropy(x, q) + (2.0 * math.sqrt(delta) + delta * math.log(q - 1)) / math.log(q)
    return lhs, rhs
