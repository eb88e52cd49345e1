"""Numeric checks of the inequalities behind the decoder's correctness argument.

Each check runs over random parameter draws and synthetic adversary
trajectories. A draw picks q, eps, p, p* with 2p + p* + eps <= (q-1)/q and a
chunk count K >= 9q^2/eps^2, so the chunk fraction theta = 1/K never exceeds
eps^2/(9q^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .capacity import capacity
from .params import ChannelParams
from .qmath import lemma1_margin
from .trajectory import (
    SLACK,
    alpha0,
    branch_floor,
    chunk_end_array,
    check_conditions,
    p_hat_t,
    p_tilde_t,
    stop_point,
    t_zero,
    upper_end,
)

CLAIMS = ("lemma1", "list_energy", "stop_above", "ingap", "suffix_bound", "zero_start")
MAX_DUMP = 5


@dataclass
class ClaimResult:
    name: str
    checks: int = 0
    failures: int = 0
    skipped: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.checks > 0

    def record(self, ok, info_fn) -> None:
        ok = np.atleast_1d(np.asarray(ok, dtype=bool))
        self.checks += int(ok.size)
        bad = int(ok.size - np.count_nonzero(ok))
        if bad:
            self.failures += bad
            if len(self.counterexamples) < MAX_DUMP:
                self.counterexamples.append(info_fn(np.nonzero(~ok)[0]))


@dataclass
class VerifyReport:
    draws: int
    results: dict

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def lines(self) -> list[str]:
        out = []
        for name in CLAIMS:
            r = self.results[name]
            tag = "PASS" if r.passed else "FAIL"
            out.append(f"{tag} {name}: {r.checks} checks, {r.failures} failures, {r.skipped} skipped")
        return out

    def to_dict(self) -> dict:
        return {
            "draws": self.draws, "passed": self.passed,
            "claims": {k: {"checks": r.checks, "failures": r.failures, "skipped": r.skipped,
                           "passed": r.passed, "counterexamples": r.counterexamples}
                       for k, r in self.results.items()},
        }


def draw_params(rng: np.random.Generator, q: int, eps_range=(0.08, 0.3), max_chunk_len: int = 3) -> ChannelParams:
    c = (q - 1) / q
    eps = float(rng.uniform(*eps_range))
    budget = float(rng.uniform(0.02, 0.98)) * (c - eps)
    share = float(rng.uniform(0.0, 1.0))
    p_star = share * budget
    p = (budget - p_star) / 2.0
    K = int(math.ceil(9.0 * q * q / eps**2))
    L = int(rng.integers(1, max_chunk_len + 1))
    return ChannelParams(q=q, p=p, p_star=p_star, epsilon=eps, n=K * L, chunk_len=L)


# synthetic trajectories


def _erasure_mask(rng, P: ChannelParams, shape: str) -> np.ndarray:
    n, z = P.n, P.erasure_cap
    m = np.zeros(n, dtype=bool)
    if z == 0 or shape == "none":
        return m
    if shape == "uniform":
        m[rng.choice(n, size=z, replace=False)] = True
    elif shape == "front":
        m[:z] = True
    elif shape == "back":
        m[n - z:] = True
    elif shape == "partial":
        k = int(rng.integers(0, z + 1))
        m[rng.choice(n, size=k, replace=False)] = True
    return m


def _place_errors(rng, P: ChannelParams, erased: np.ndarray, shape: str, margin_scale: float) -> np.ndarray:
    n, e = P.n, P.error_cap
    free = np.nonzero(~erased)[0]
    m = np.zeros(n, dtype=bool)
    e = min(e, len(free))
    if e == 0:
        return m
    if shape == "uniform":
        m[rng.choice(free, size=e, replace=False)] = True
    elif shape == "front":
        m[free[:e]] = True
    elif shape == "back":
        m[free[len(free) - e:]] = True
    elif shape == "burst":
        start = int(rng.integers(0, len(free) - e + 1))
        m[free[start:start + e]] = True
    elif shape == "track":
        m = _tracking_errors(rng, P, erased, margin_scale)
    return m


def _tracking_errors(rng, P: ChannelParams, erased: np.ndarray, margin_scale: float) -> np.ndarray:
    """Errors that keep the running count just above the reference trajectory, then stop."""
    n, L, e = P.n, P.chunk_len, P.error_cap
    ends = chunk_end_array(P)
    lam = np.cumsum(erased)[ends - 1]
    d = ends - lam
    ph = p_hat_t(ends, lam, P, margin_scale=margin_scale, strict=False)
    target = np.where(np.isnan(ph), np.floor(P.p * d), np.floor(np.nan_to_num(ph) * d) + 1)
    stop = int(rng.integers(0, len(ends)))
    target[stop + 1:] = target[stop]
    cum = np.minimum(np.maximum.accumulate(target), e).astype(np.int64)
    want = np.diff(np.concatenate([[0], cum, [cum[-1]]]))  # per chunk, last chunk gets none
    K = n // L
    free = (~erased).reshape(K, L)
    rank = np.cumsum(free, axis=1)
    return (free & (rank <= want[:, None])).reshape(-1)


ERROR_SHAPES = ("uniform", "front", "back", "burst", "track")
ERASURE_SHAPES = ("uniform", "front", "back", "partial", "none")


def synthetic_trajectories(rng, P: ChannelParams, margin_scale: float = 1.0):
    """Yield (error_mask, erasure_mask) pairs covering several placement shapes."""
    for es in ERROR_SHAPES:
        zs = ERASURE_SHAPES[int(rng.integers(len(ERASURE_SHAPES)))]
        er = _erasure_mask(rng, P, zs)
        yield _place_errors(rng, P, er, es, margin_scale), er


# individual claims


def check_lemma1(res: ClaimResult, qs, points: int = 60) -> None:
    for q in qs:
        top = 1.0 - 1.0 / q
        for delta in np.geomspace(1e-6, 0.499, points):
            if delta > top:
                continue
            for x in np.linspace(0.0, top - delta, points):
                lhs, rhs = lemma1_margin(float(x), float(delta), q)
                res.record(lhs < rhs, lambda _i, x=x, d=delta, q=q: {"q": q, "x": float(x), "delta": float(d)})


def _pinfo(P: ChannelParams) -> dict:
    return {"q": P.q, "p": P.p, "p_star": P.p_star, "epsilon": P.epsilon, "n": P.n, "chunk_len": P.chunk_len}


def check_draw(P: ChannelParams, rng, results: dict, margin_scale: float = 1.0) -> None:
    n, q, c = P.n, P.q, (P.q - 1) / P.q
    rate = capacity(q, P.p, P.p_star).value - P.epsilon
    ends = chunk_end_array(P)
    lo, hi = branch_floor(P), upper_end(P)
    trajs = list(synthetic_trajectories(rng, P, margin_scale))
    trajs.append((np.zeros(n, dtype=bool), np.zeros(n, dtype=bool)))
    E, Z = P.error_cap, P.erasure_cap
    for err, era in trajs:
        e = np.cumsum(err)[ends - 1]
        lam = np.cumsum(era)[ends - 1]
        d = ends - lam
        a = d / n
        in_rng = (a >= lo - SLACK) & (a <= hi + SLACK)
        ph = p_hat_t(ends, lam, P, margin_scale=margin_scale, strict=False)

        def info(idx, extra=None):
            i = int(idx[0])
            out = {**_pinfo(P), "t": int(ends[i]), "lambda_t": int(lam[i]), "errors": int(e[i])}
            if extra:
                out.update(extra)
            return out

        # list-decoding and energy-bounding conditions at R = C - eps
        if rate > 0:
            lok, eok = check_conditions(ends[in_rng], lam[in_rng], P, rate, margin_scale)
            sel = np.nonzero(in_rng)[0]
            results["list_energy"].record(lok & eok, lambda idx: info(sel[idx], {"rate": rate}))
        else:
            results["list_energy"].skipped += 1

        # the reference trajectory is high enough at the stop point
        ts = stop_point(lam, P)
        i = ts // P.chunk_len - 1
        val = d[i] * p_hat_t(ts, int(lam[i]), P, margin_scale=margin_scale)
        results["stop_above"].record(val >= n * P.p - SLACK * n, lambda _i: info([i], {"value": float(val)}))

        # above the reference at t - L implies above the energy trajectory at t
        th = P.chunk_len
        gate = np.zeros(len(ends), dtype=bool)
        gate[1:] = (a[1:] >= lo + th / n - SLACK) & (a[1:] <= hi + SLACK)
        prev_above = np.zeros(len(ends), dtype=bool)
        prev_above[1:] = ~np.isnan(ph[:-1]) & (e[:-1] > np.nan_to_num(ph[:-1]) * d[:-1])
        sel = np.nonzero(gate & prev_above)[0]
        if len(sel):
            pt = p_tilde_t(ends[sel], lam[sel], P)
            results["ingap"].record(e[sel] > pt * d[sel] - SLACK * n, lambda idx: info(sel[idx]))

        # above the energy trajectory means the suffix is lightly corrupted
        D = n - ends - n * P.p_star + lam
        suffix_free = (n - ends) - (Z - lam)
        ok_den = in_rng & (D > 0) & (d > 0)
        results["suffix_bound"].skipped += int(np.count_nonzero(in_rng & ~(D > 0)))
        sel = np.nonzero(ok_den)[0]
        if len(sel):
            pt = p_tilde_t(ends[sel], lam[sel], P)
            above = e[sel] > pt * d[sel]
            sel = sel[above]
            results["suffix_bound"].skipped += int(np.count_nonzero(suffix_free[sel] <= 0))
            sel = sel[suffix_free[sel] > 0]
            if len(sel):
                frac = (E - e[sel]) / suffix_free[sel]
                bound = c / 2 - P.margin - n * P.p_star / (2 * q * D[sel])
                results["suffix_bound"].record(frac < bound + SLACK, lambda idx: info(sel[idx]))

        # energy condition at the start point when Calvin starts at or below the reference
        t0 = t_zero(lam, P)
        i0 = t0 // P.chunk_len - 1
        ph0 = p_hat_t(t0, int(lam[i0]), P, margin_scale=margin_scale)
        for frac in (0.0, 0.5, 1.0):
            pt0 = frac * ph0
            lhs = n * P.p - d[i0] * pt0 + (n - t0) * P.margin
            rhs = P.half_gap * (n - n * P.p_star - t0 + lam[i0])
            results["zero_start"].record(lhs <= rhs + SLACK * n, lambda _i: info([i0], {"p_t0": pt0}))


def run_verify(qs=(2, 3, 4), draws_per_q: int = 200, seed: int = 0, margin_scale: float = 1.0,
               lemma_points: int = 60) -> VerifyReport:
    """Run every claim check over ``draws_per_q`` random parameter draws per alphabet size."""
    results = {name: ClaimResult(name) for name in CLAIMS}
    rng = np.random.default_rng(seed)
    check_lemma1(results["lemma1"], qs, lemma_points)
    draws = 0
    for q in qs:
        for _ in range(draws_per_q):
            P = draw_params(rng, q)
            check_draw(P, rng, results, margin_scale)
            draws += 1
    return VerifyReport(draws, results)


__all__ = ["CLAIMS", "ClaimResult", "VerifyReport", "draw_params", "run_verify", "check_draw",
           "synthetic_trajectories", "alpha0"]
