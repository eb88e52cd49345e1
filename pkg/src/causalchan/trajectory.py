"""Reference trajectories that drive Bob's iterative decoder.

Everything is indexed by chunk ends t in {L, 2L, ..., n - L} where L is the
chunk length, and by lambda_t, the number of erasures Bob has seen up to t.
The functions accept scalars or numpy arrays for ``t`` and ``lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .capacity import alpha_q
from .params import ChannelParams
from .qmath import DomainError, q_entropy, q_entropy_inverse_array

SLACK = 1e-12
HIGH = "High"
LOW = "Low"


def alpha0(params: ChannelParams) -> float:
    return alpha_q(0.0, params.q, params.p, params.p_star)


def branch_floor(params: ChannelParams) -> float:
    """Smallest (t - lambda)/n at which the decoding reference trajectory is defined."""
    return alpha0(params) - params.epsilon**2 / 4.0


def upper_end(params: ChannelParams) -> float:
    """(t - lambda)/n once every erasure has been spent: 1 - (q/(q-1)) p*."""
    return 1.0 - params.q / (params.q - 1.0) * params.p_star


def p_bar_t(t, lam, params: ChannelParams):
    """Bob's running guess of the noise level that is not pushed."""
    a = (np.asarray(t, dtype=float) - lam) / params.n
    val = params.p + params.p_star / 2.0 - params.half_gap * (1.0 - a)
    return float(val) if np.ndim(val) == 0 else val


def p_hat_t(t, lam, params: ChannelParams, margin_scale: float = 1.0, strict: bool = True):
    """Decoding reference trajectory.

    Constant margin/alpha0^2 on [alpha0 - eps^2/4, alpha0), then
    pbar_t/a + margin/a^2 with a = (t - lambda)/n.

    Parameters
    ----------
    margin_scale : float
        Multiplies the eps^2/(9q^2) margin. Only the fault-injection path of
        the claim checker changes it.
    strict : bool
        If true, raise below the branch-1 floor; otherwise return NaN there.
    """
    a = (np.asarray(t, dtype=float) - lam) / params.n
    a0 = alpha0(params)
    floor = a0 - params.epsilon**2 / 4.0
    below = a < floor - SLACK
    if strict and np.any(below):
        raise DomainError(f"(t - lambda)/n below the reference floor {floor:.6g}")
    m = params.margin * margin_scale
    with np.errstate(divide="ignore", invalid="ignore"):
        pbar = params.p + params.p_star / 2.0 - params.half_gap * (1.0 - a)
        b2 = pbar / a + m / (a * a)
    b1 = m / (a0 * a0)
    val = np.where(a < a0, b1, b2)
    val = np.where(below, np.nan, val)
    return float(val) if np.ndim(val) == 0 else val


def p_tilde_t(t, lam, params: ChannelParams):
    """Energy bounding trajectory pbar_t/a + (n - t) margin / (t - lambda)."""
    t = np.asarray(t, dtype=float)
    d = t - lam
    if np.any(d <= 0):
        raise DomainError("t - lambda must be positive")
    a = d / params.n
    pbar = params.p + params.p_star / 2.0 - params.half_gap * (1.0 - a)
    val = pbar / a + (params.n - t) * params.margin / d
    return float(val) if np.ndim(val) == 0 else val


def check_conditions(t, lam, params: ChannelParams, rate: float, margin_scale: float = 1.0):
    """List-decoding and energy-bounding conditions at chunk end ``t``.

    Returns ``(list_ok, energy_ok)``, each a bool (or bool array).
    """
    n = params.n
    t = np.asarray(t, dtype=float)
    d = t - lam
    ph = p_hat_t(t, lam, params, margin_scale=margin_scale, strict=False)
    ok_dom = ~np.isnan(ph)
    top = 1.0 - 1.0 / params.q
    h = q_entropy(np.clip(np.nan_to_num(ph), 0.0, top), params.q)
    list_lhs = d * (1.0 - h) - n * params.epsilon / 4.0
    list_ok = ok_dom & (list_lhs >= n * rate - SLACK * n)
    energy_lhs = n * params.p - d * ph + (n - t) * params.margin
    energy_rhs = params.half_gap * (n - n * params.p_star - t + lam)
    energy_ok = ok_dom & (energy_lhs <= energy_rhs + SLACK * n)
    if np.ndim(list_ok) == 0:
        return bool(list_ok), bool(energy_ok)
    return list_ok, energy_ok


def list_size_bound(t, lam, params: ChannelParams, rate: float) -> float | None:
    """Upper bound on the list size at chunk end ``t``.

    (t - lam + 3 log_q n) / ((t - lam)(1 - H_q(p_hat)) - nR - n theta^2/q^2);
    None when the denominator is not positive (the bound says nothing).
    """
    n, q = params.n, params.q
    d = t - lam
    ph = p_hat_t(t, lam, params)
    den = d * (1.0 - q_entropy(min(ph, 1.0 - 1.0 / q), q)) - n * rate - n * params.theta**2 / q**2
    if den <= 0:
        return None
    return (d + 3.0 * math.log(n, q)) / den


# profiles over chunk ends


def chunk_end_array(params: ChannelParams) -> np.ndarray:
    return np.arange(params.chunk_len, params.n, params.chunk_len, dtype=np.int64)


def lambda_profile_from_word(y: np.ndarray, params: ChannelParams) -> np.ndarray:
    """Erasure counts at every chunk end; erasures are coded as the symbol value q."""
    er = np.cumsum(np.asarray(y) == params.q)
    return er[chunk_end_array(params) - 1].astype(np.int64)


def _as_profile(lambda_profile, params: ChannelParams) -> np.ndarray:
    ends = chunk_end_array(params)
    if lambda_profile is None:
        return np.zeros(len(ends), dtype=np.int64)
    lam = np.asarray(lambda_profile, dtype=np.int64)
    if lam.shape != ends.shape:
        raise ValueError(f"lambda profile needs {len(ends)} entries, got {lam.shape}")
    if np.any(lam < 0) or np.any(np.diff(lam) < 0) or np.any(lam > ends):
        raise ValueError("lambda profile must be nondecreasing with 0 <= lambda_t <= t")
    return lam


def t_zero(lambda_profile, params: ChannelParams) -> int:
    """First chunk end with t - lambda_t >= n(alpha0 - eps^2/4)."""
    ends = chunk_end_array(params)
    lam = _as_profile(lambda_profile, params)
    need = params.n * branch_floor(params)
    hit = np.nonzero(ends - lam >= need - SLACK * params.n)[0]
    if len(hit) == 0:
        raise DomainError("no chunk end reaches the start threshold")
    return int(ends[hit[0]])


def stop_point(lambda_profile, params: ChannelParams) -> int:
    """Last chunk end with t - lambda_t <= n - (q/(q-1)) n p* - n theta."""
    ends = chunk_end_array(params)
    lam = _as_profile(lambda_profile, params)
    lim = params.n * upper_end(params) - params.chunk_len
    hit = np.nonzero(ends - lam <= lim + SLACK * params.n)[0]
    if len(hit) == 0:
        raise DomainError("no chunk end lies below the stop threshold")
    return int(ends[hit[-1]])


@dataclass(frozen=True)
class TrajectorySample:
    t: int
    lambda_t: int
    p_bar_t: float
    p_hat_t: float | None
    p_tilde_t: float | None
    list_condition_holds: bool
    energy_condition_holds: bool


def sweep(params: ChannelParams, rate: float, lambda_profile=None) -> list[TrajectorySample]:
    """Evaluate every trajectory quantity at every chunk end.

    p_hat and p_tilde are None outside the range where they are defined.
    """
    ends = chunk_end_array(params)
    lam = _as_profile(lambda_profile, params)
    pb = p_bar_t(ends, lam, params)
    ph = p_hat_t(ends, lam, params, strict=False)
    d = ends - lam
    top = params.n * upper_end(params)
    in_range = (~np.isnan(ph)) & (d <= top + SLACK * params.n)
    lo, en = check_conditions(ends, lam, params, rate)
    out = []
    for i, t in enumerate(ends):
        ok = bool(in_range[i])
        pt = p_tilde_t(int(t), int(lam[i]), params) if ok and d[i] > 0 else None
        out.append(TrajectorySample(
            t=int(t), lambda_t=int(lam[i]), p_bar_t=float(pb[i]),
            p_hat_t=float(ph[i]) if ok else None, p_tilde_t=pt,
            list_condition_holds=bool(lo[i]) if ok else False,
            energy_condition_holds=bool(en[i]) if ok else False,
        ))
    return out


def region_curves(params: ChannelParams, rate: float, stride: int = 1) -> dict:
    """Curves bounding Calvin's error fraction and the admissible reference trajectory.

    Evaluated at t = stride, 2 stride, ..., n with no erasures. Returns arrays
    keyed by name; entries are NaN where a curve is undefined.

    * ``upper_pt``: all floor(pn) errors as early as possible, min(t, E)/t.
    * ``lower_pt``: errors held back as long as possible, max(0, E - (n - t))/t.
    * ``energy_floor``: smallest p_hat meeting the energy-bounding condition.
    * ``list_ceiling``: largest p_hat meeting the list-decoding condition.
    * ``p_hat``: the reference trajectory, clipped to where it is defined.
    """
    n, q = params.n, params.q
    t = np.arange(stride, n + 1, stride, dtype=np.int64)
    if t[-1] != n:
        t = np.append(t, n)
    E = params.error_cap
    tf = t.astype(float)
    upper = np.minimum(tf, E) / tf
    lower = np.maximum(0.0, E - (n - tf)) / tf
    energy = (n * params.p + (n - tf) * params.margin
              - params.half_gap * (n - n * params.p_star - tf)) / tf
    arg = 1.0 - (n * rate + n * params.epsilon / 4.0) / tf
    ceiling = q_entropy_inverse_array(np.minimum(arg, 1.0), q)
    ph = p_hat_t(t, 0, params, strict=False)
    ph = np.where(tf / n > upper_end(params) + SLACK, np.nan, ph)
    return {"t": t, "upper_pt": upper, "lower_pt": lower, "energy_floor": energy,
            "list_ceiling": ceiling, "p_hat": ph}


@dataclass(frozen=True)
class CalvinTrajectory:
    """Cumulative error and erasure counts at each chunk end."""

    errors: np.ndarray
    erasures: np.ndarray
    params: ChannelParams

    @classmethod
    def from_masks(cls, error_mask, erasure_mask, params: ChannelParams) -> "CalvinTrajectory":
        em = np.asarray(error_mask, dtype=bool)
        zm = np.asarray(erasure_mask, dtype=bool)
        if np.any(em & zm):
            raise ValueError("a position cannot be both substituted and erased")
        ends = chunk_end_array(params) - 1
        return cls(np.cumsum(em)[ends].astype(np.int64), np.cumsum(zm)[ends].astype(np.int64), params)

    @classmethod
    def from_words(cls, x, y, params: ChannelParams) -> "CalvinTrajectory":
        x = np.asarray(x)
        y = np.asarray(y)
        erased = y == params.q
        return cls.from_masks((~erased) & (x != y), erased, params)

    @property
    def ends(self) -> np.ndarray:
        return chunk_end_array(self.params)

    @property
    def unerased(self) -> np.ndarray:
        return self.ends - self.erasures

    @property
    def p_t(self) -> np.ndarray:
        d = self.unerased
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(d > 0, self.errors / np.maximum(d, 1), 0.0)

    def above(self, idx: int, margin_scale: float = 1.0) -> bool:
        """p_t >= p_hat_t at chunk index ``idx``, compared on counts."""
        t = int(self.ends[idx])
        lam = int(self.erasures[idx])
        ph = p_hat_t(t, lam, self.params, margin_scale=margin_scale)
        return self.errors[idx] >= ph * (t - lam) - SLACK * self.params.n


def classify_and_find_tstar(calvin: CalvinTrajectory, params: ChannelParams) -> tuple[str, int]:
    """Trajectory type and the chunk end where it first meets the reference trajectory."""
    ends = chunk_end_array(params)
    t0 = t_zero(calvin.erasures, params)
    i0 = int(np.nonzero(ends == t0)[0][0])
    if not calvin.above(i0):
        return LOW, t0
    stop = stop_point(calvin.erasures, params)
    e, lam = calvin.errors, calvin.erasures
    for i in range(i0 + 1, len(ends)):
        if ends[i] > stop:
            break
        t_prev, t = int(ends[i - 1]), int(ends[i])
        prev_hat = p_hat_t(t_prev, int(lam[i - 1]), params) * (t_prev - lam[i - 1])
        cur_hat = p_hat_t(t, int(lam[i]), params) * (t - lam[i])
        if e[i - 1] > prev_hat and e[i] <= cur_hat + SLACK * params.n:
            return HIGH, t
    raise DomainError("trajectory never meets the reference trajectory before the stop point")
