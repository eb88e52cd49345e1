"""Causal adversaries and the channel loop that enforces causality and budgets.

Actions are plain integers: ``PASS`` (-1), ``ERASE`` (-2), or a symbol value
to substitute. At position i (0-based) an adversary sees x[:i + 1 + lookahead]
and y[:i], and the remaining budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .capacity import alpha_q
from .codec import Codebook
from .params import ChannelParams
from .rng import stream

PASS = -1
ERASE = -2

BASELINES = ("null", "uniform_random", "greedy_push", "front_loaded")


class AdversaryConfigError(ValueError):
    pass


@dataclass
class AdversaryBudget:
    error_cap: int
    erasure_cap: int
    errors_used: int = 0
    erasures_used: int = 0

    @classmethod
    def for_params(cls, params: ChannelParams) -> "AdversaryBudget":
        return cls(params.error_cap, params.erasure_cap)

    @property
    def errors_left(self) -> int:
        return self.error_cap - self.errors_used

    @property
    def erasures_left(self) -> int:
        return self.erasure_cap - self.erasures_used


def _seed_parts(seed) -> tuple[int, int]:
    if isinstance(seed, tuple):
        return int(seed[0]), int(seed[1])
    return int(seed), 0


class Adversary:
    """Base class: subclasses override :meth:`step` and optionally :meth:`begin`."""

    kind = "base"
    lookahead = 0

    def __init__(self, params: ChannelParams, seed=0, label: str | None = None):
        self.params = params
        master, trial = _seed_parts(seed)
        self.rng = stream(master, "adversary_babble", trial, label)
        self.coin_rng = stream(master, "adversary_coins", trial, label)
        self.budget = AdversaryBudget.for_params(params)
        self.message = None  # set only when configured to know m

    def begin(self) -> None:
        pass

    def step(self, x_prefix: np.ndarray, y_prefix: np.ndarray, i: int) -> int:
        raise NotImplementedError

    def _other_symbol(self, xi: int) -> int:
        q = self.params.q
        return int((xi + 1 + self.rng.integers(q - 1)) % q)

    def info(self) -> dict:
        return {"kind": self.kind}


class NullAdversary(Adversary):
    kind = "null"

    def step(self, x_prefix, y_prefix, i):
        return PASS


class PlannedAdversary(Adversary):
    """Acts on a position plan fixed before transmission; only the substituted symbol depends on x_i."""

    def plan(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def begin(self):
        n = self.params.n
        err, era = self.plan()
        self._code = np.zeros(n, dtype=np.int8)
        self._code[err] = 1
        self._code[era] = 2

    def step(self, x_prefix, y_prefix, i):
        c = self._code[i]
        if c == 1:
            return self._other_symbol(int(x_prefix[i]))
        if c == 2:
            return ERASE
        return PASS


class UniformRandomAdversary(PlannedAdversary):
    kind = "uniform_random"

    def plan(self):
        e, z = self.budget.error_cap, self.budget.erasure_cap
        n = self.params.n
        pos = self.rng.choice(n, size=min(n, e + z), replace=False)
        return pos[:e], pos[e:]


class GreedyPushAdversary(PlannedAdversary):
    """All errors, then all erasures, packed against the end of the block."""

    kind = "greedy_push"

    def plan(self):
        e, z, n = self.budget.error_cap, self.budget.erasure_cap, self.params.n
        z = min(z, n)
        e = min(e, n - z)
        return np.arange(n - z - e, n - z), np.arange(n - z, n)


class FrontLoadedAdversary(PlannedAdversary):
    """All errors at the start of the block, erasures right after them."""

    kind = "front_loaded"

    def plan(self):
        e, z, n = self.budget.error_cap, self.budget.erasure_cap, self.params.n
        e = min(e, n)
        z = min(z, n - e)
        return np.arange(0, e), np.arange(e, e + z)


def make_baseline(kind: str, params: ChannelParams, seed=0, label: str | None = None) -> Adversary:
    cls = {
        "null": NullAdversary,
        "uniform_random": UniformRandomAdversary,
        "greedy_push": GreedyPushAdversary,
        "front_loaded": FrontLoadedAdversary,
    }.get(kind)
    if cls is None:
        raise AdversaryConfigError(f"unknown baseline {kind!r}; choose from {BASELINES}")
    return cls(params, seed, label)


# babble and push


@dataclass
class TargetSet:
    """Pairs (m, secret prefix) whose codeword prefix sits at a chosen distance from y_b."""

    distances: tuple[int, ...]
    counts: np.ndarray  # relative weight per message
    fallback: bool


def babble_length(params: ChannelParams, pbar: float, clamp: bool = False) -> int:
    """b = floor(n (alpha_q(pbar) + eps/2)), kept at most n - 1."""
    n = params.n
    raw = n * (alpha_q(pbar, params.q, params.p, params.p_star) + params.epsilon / 2.0)
    if raw > n and not clamp:
        raise AdversaryConfigError(
            f"babble length n(alpha + eps/2) = {raw:.6g} exceeds n = {n}; enable clamping to allow it"
        )
    b = min(int(math.floor(raw + 1e-9)), n - 1)
    k = int(math.floor(n * pbar + 1e-9))
    if b < k:
        raise AdversaryConfigError(f"babble length {b} is shorter than the babble budget {k}")
    return b


def _prefix_distances(cb: Codebook, y_b: np.ndarray) -> np.ndarray:
    b = len(y_b)
    L = cb.chunk_len
    kb = -(-b // L)
    y = np.full(kb * L, cb.q, dtype=np.int32)
    y[:b] = y_b
    return kernels.chunk_distances(cb.table[:kb], y.reshape(kb, L), cb.q)


def target_set(cb: Codebook, y_b: np.ndarray, target: int) -> tuple[TargetSet, np.ndarray]:
    """Weights of pairs at distance exactly ``target`` from y_b.

    When no pair sits at that distance, falls back to the nearest achievable
    distance(s) and flags it. Returns the set and the per-chunk distance table.
    """
    dist = _prefix_distances(cb, y_b)
    b = len(y_b)
    polys, _ = kernels.distance_polys(dist, b)
    present = polys.sum(axis=0) > 0
    if present[target]:
        ds, fb = (target,), False
    else:
        have = np.nonzero(present)[0]
        gap = np.min(np.abs(have - target))
        ds = tuple(int(d) for d in (target - gap, target + gap) if 0 <= d <= b and present[d])
        fb = True
    counts = polys[:, list(ds)].sum(axis=1)
    return TargetSet(ds, counts, fb), dist


def enumerate_target_pairs(cb: Codebook, y_b: np.ndarray, target: int) -> list[tuple[int, tuple[int, ...]]]:
    """Every (m, secret prefix) at distance exactly ``target``; exhaustive, for small codes."""
    import itertools

    b = len(y_b)
    L = cb.chunk_len
    kb = -(-b // L)
    out = []
    for m in range(cb.message_count):
        for sec in itertools.product(range(cb.secret_count), repeat=kb):
            word = cb.table[np.arange(kb), m, list(sec), :].reshape(-1)[:b]
            if int(np.count_nonzero(word != y_b)) == target:
                out.append((m, sec))
    return out


def sample_target(cb: Codebook, ts: TargetSet, dist: np.ndarray, rng: np.random.Generator) -> tuple[int, np.ndarray]:
    """Draw (m', s') uniformly from the target set; secrets past the babble prefix are uniform."""
    w = ts.counts / ts.counts.sum()
    m = int(rng.choice(len(w), p=w))
    kb = dist.shape[0]
    d_m = dist[:, m, :]
    width = int(max(ts.distances)) + 1
    # forward pass for this message only, keeping every stage
    stages = np.zeros((kb + 1, width))
    stages[0, 0] = 1.0
    for k in range(kb):
        nxt = np.zeros(width)
        for s in range(cb.secret_count):
            d = int(d_m[k, s])
            if d < width:
                nxt[d:] += stages[k, : width - d]
        peak = nxt.max()
        stages[k + 1] = nxt / peak if peak > 0 else nxt
    ends = np.array([stages[kb, d] for d in ts.distances])
    r = int(ts.distances[int(rng.choice(len(ends), p=ends / ends.sum()))])
    secrets = np.empty(cb.n_chunks, dtype=np.int64)
    for k in range(kb - 1, -1, -1):
        ww = np.array([stages[k, r - d_m[k, s]] if r - d_m[k, s] >= 0 else 0.0
                       for s in range(cb.secret_count)])
        s = int(rng.choice(cb.secret_count, p=ww / ww.sum()))
        secrets[k] = s
        r -= int(d_m[k, s])
    if kb < cb.n_chunks:
        secrets[kb:] = rng.integers(0, cb.secret_count, size=cb.n_chunks - kb)
    return m, secrets


class BabblePushAdversary(Adversary):
    """Random errors on a hidden subset of the first b positions, then steer toward a decoy codeword.

    After the babble phase it picks (m', s') uniformly among pairs whose
    codeword prefix is at the babble distance from what Bob received, and at
    every later position where x and x' differ it substitutes x'_i with
    probability 1/2 until the error cap is reached, then erases such
    positions until the erasure cap is reached.
    """

    kind = "babble_push"

    def __init__(self, cb: Codebook, pbar: float, params: ChannelParams, seed=0,
                 label: str | None = None, clamp: bool = False):
        super().__init__(params, seed, label)
        if not (0.0 <= pbar <= params.p + 1e-12):
            raise AdversaryConfigError(f"pbar = {pbar} must lie in [0, p = {params.p}]")
        self.cb = cb
        self.pbar = pbar
        self.b = babble_length(params, pbar, clamp)
        self.babble_errors = int(math.floor(params.n * pbar + 1e-9))
        self.gamma = np.sort(self.rng.choice(self.b, size=self.babble_errors, replace=False))
        self._in_gamma = np.zeros(params.n, dtype=bool)
        self._in_gamma[self.gamma] = True
        self.phase = "babble"
        self.target: tuple[int, np.ndarray] | None = None
        self.x_prime: np.ndarray | None = None
        self.fallback = False
        self.coin_log: list[bool] = []
        self.y_b: np.ndarray | None = None

    def begin(self):
        self._coins = self.coin_rng.random(self.params.n) < 0.5

    def _choose_target(self, y_b: np.ndarray) -> None:
        self.y_b = np.array(y_b, dtype=np.int64)
        ts, dist = target_set(self.cb, self.y_b, self.babble_errors)
        self.fallback = ts.fallback
        m, secrets = sample_target(self.cb, ts, dist, self.rng)
        self.target = (m, secrets)
        self.x_prime = self.cb.table[np.arange(self.cb.n_chunks), m, secrets, :].reshape(-1).astype(np.int64)
        self.phase = "push"

    def step(self, x_prefix, y_prefix, i):
        if i < self.b:
            if self._in_gamma[i]:
                return self._other_symbol(int(x_prefix[i]))
            return PASS
        if self.phase == "babble":
            self._choose_target(y_prefix[: self.b])
        xi, xp = int(x_prefix[i]), int(self.x_prime[i])
        if xi == xp:
            return PASS
        if self.budget.errors_left > 0:
            flip = bool(self._coins[i])
            self.coin_log.append(flip)
            return xp if flip else PASS
        if self.budget.erasures_left > 0:
            return ERASE
        return PASS

    def info(self) -> dict:
        d = {"kind": self.kind, "pbar": self.pbar, "b": self.b, "fallback": self.fallback,
             "coin_flips": len(self.coin_log), "coin_substitutions": int(sum(self.coin_log))}
        if self.target is not None:
            d["target_message"] = self.target[0]
        return d


def make_babble_push(cb: Codebook, pbar: float, params: ChannelParams | None = None, seed=0,
                     label: str | None = None, clamp: bool = False) -> BabblePushAdversary:
    return BabblePushAdversary(cb, pbar, params or cb.params, seed, label, clamp)


def make_adversary(spec: dict, cb: Codebook, params: ChannelParams, seed) -> Adversary:
    """Build an adversary from a config mapping such as {"kind": "babble_push", "pbar": 0.06}."""
    kind = spec.get("kind", "null")
    label = spec.get("seed_stream")
    if kind == "babble_push":
        if "pbar" not in spec:
            raise AdversaryConfigError("babble_push needs a pbar value")
        adv = make_babble_push(cb, float(spec["pbar"]), params, seed, label, bool(spec.get("clamp", False)))
    else:
        adv = make_baseline(kind, params, seed, label)
    adv.lookahead = int(spec.get("lookahead", 0))
    return adv


# channel loop


class CausalSource:
    """Releases transmitted symbols no earlier than they are needed.

    ``x`` holds -1 for positions that have not been generated yet; the
    ``fill`` callback generates whole chunks on demand.
    """

    def __init__(self, n: int, fill):
        self.x = np.full(n, -1, dtype=np.int64)
        self.ready = 0
        self._fill = fill

    @classmethod
    def from_word(cls, x) -> "CausalSource":
        x = np.asarray(x, dtype=np.int64)

        def fill(src, j):
            src.x[src.ready:j] = x[src.ready:j]
            src.ready = j

        return cls(len(x), fill)

    def ensure(self, j: int) -> None:
        if j > self.ready:
            self._fill(self, j)


@dataclass
class ChannelResult:
    y: np.ndarray
    actions: np.ndarray
    budget: AdversaryBudget
    violations: int = 0
    violation_positions: list = field(default_factory=list)


def run_channel(source, adversary: Adversary, params: ChannelParams) -> ChannelResult:
    """Feed the block through ``adversary`` one symbol at a time, clamping illegal actions to Pass."""
    if not isinstance(source, CausalSource):
        source = CausalSource.from_word(source)
    n, q = params.n, params.q
    y = np.empty(n, dtype=np.int64)
    actions = np.full(n, PASS, dtype=np.int64)
    bud = adversary.budget
    adversary.begin()
    xv = source.x
    violations = []
    la = max(0, int(adversary.lookahead))
    for i in range(n):
        j = min(n, i + 1 + la)
        source.ensure(j)
        xi = int(xv[i])
        xp = xv[:j]
        xp.flags.writeable = False
        a = adversary.step(xp, y[:i], i)
        if a == PASS:
            y[i] = xi
            continue
        if a == ERASE:
            if bud.erasures_used < bud.erasure_cap:
                bud.erasures_used += 1
                y[i] = q
                actions[i] = ERASE
            else:
                violations.append(i)
                y[i] = xi
            continue
        if 0 <= a < q and a != xi and bud.errors_used < bud.error_cap:
            bud.errors_used += 1
            y[i] = a
            actions[i] = a
        else:
            violations.append(i)
            y[i] = xi
    return ChannelResult(y, actions, bud, len(violations), violations)
