"""Seeded Monte Carlo harness: encoder, adversary and decoder, one trial at a time."""

from __future__ import annotations

import base64
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .adversary import CausalSource, make_adversary, run_channel
from .codec import DECODED, AMBIGUOUS, EXHAUSTED, Codebook, bob_decode, generate_codebook
from .params import ChannelParams, ParameterError
from .rng import stream
from .trajectory import CalvinTrajectory, classify_and_find_tstar
from .qmath import DomainError

TRANSCRIPT_VERSION = 1
Z95 = 1.959963984540054


@dataclass
class TrialConfig:
    params: ChannelParams
    adversary: dict = field(default_factory=lambda: {"kind": "null"})
    message_policy: str | int = "uniform"
    trials: int = 1
    seed: int = 0
    codebook_seed: int | None = None
    knows_message: bool = False

    @property
    def code_seed(self) -> int:
        return self.seed if self.codebook_seed is None else self.codebook_seed

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(), "adversary": dict(self.adversary),
                "message_policy": self.message_policy, "trials": self.trials,
                "seed": self.seed, "codebook_seed": self.code_seed,
                "knows_message": self.knows_message}


def params_from_mapping(cfg: dict) -> ChannelParams:
    """Build channel parameters from flat config keys (q, p, pstar, eps, n, theta or chunk_len, ...)."""
    q = int(cfg["q"])
    p = float(cfg.get("p", 0.0))
    ps = float(cfg.get("pstar", cfg.get("p_star", 0.0)))
    eps = float(cfg.get("eps", cfg.get("epsilon", 0.1)))
    n = int(cfg["n"])
    if cfg.get("theoretical_mode"):
        if any(k in cfg for k in ("theta", "chunk_len", "secrets")):
            raise ParameterError(["theoretical mode fixes theta and the secret count; do not override them"])
        return ChannelParams.theoretical(q, p, ps, eps, n)
    kw = {}
    if cfg.get("messages") is not None:
        kw["message_count"] = int(cfg["messages"])
    elif cfg.get("rate") is not None:
        kw["rate"] = float(cfg["rate"])
    kw["secret_count"] = int(cfg.get("secrets", 1))
    return ChannelParams.build(q=q, p=p, p_star=ps, epsilon=eps, n=n,
                               theta=cfg.get("theta"), chunk_len=cfg.get("chunk_len"), **kw)


def config_from_mapping(cfg: dict) -> TrialConfig:
    params = params_from_mapping(cfg)
    errs = params.coding_violations()
    if errs:
        raise ParameterError(errs)
    msg = cfg.get("message", "uniform")
    if msg != "uniform":
        msg = int(msg)
        if not (0 <= msg < params.message_count):
            raise ParameterError([f"message id {msg} outside [0, {params.message_count})"])
    trials = int(cfg.get("trials", 1))
    if trials < 0:
        raise ParameterError(["trial count must be nonnegative"])
    return TrialConfig(params=params, adversary=dict(cfg.get("adversary", {"kind": "null"})),
                       message_policy=msg, trials=trials, seed=int(cfg.get("seed", 0)),
                       codebook_seed=cfg.get("codebook_seed"),
                       knows_message=bool(cfg.get("knows_message", False)))


# symbol arrays inside JSON


def _pack(arr: np.ndarray, dtype: str) -> dict:
    a = np.ascontiguousarray(arr, dtype=np.dtype(dtype))
    return {"dtype": dtype, "len": int(a.size), "b64": base64.b64encode(a.tobytes()).decode("ascii")}


def _unpack(d: dict) -> np.ndarray:
    return np.frombuffer(base64.b64decode(d["b64"]), dtype=np.dtype(d["dtype"])).astype(np.int64)


@dataclass
class Transcript:
    trial: int
    seed: int
    message: int
    secrets: np.ndarray
    x: np.ndarray
    actions: np.ndarray
    y: np.ndarray
    outcome: dict
    adversary: dict
    errors_used: int
    erasures_used: int
    violations: int
    calvin_type: str | None = None
    t_star: int | None = None
    coin_log: list = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.outcome["kind"] == DECODED and self.outcome["message"] == self.message

    def to_json(self, q: int) -> str:
        sym = "<u1" if q < 256 else "<u2"
        doc = {
            "version": TRANSCRIPT_VERSION, "trial": self.trial, "seed": self.seed,
            "message": self.message, "secrets": _pack(self.secrets, "<u4"),
            "x": _pack(self.x, sym), "actions": _pack(self.actions, "<i4"), "y": _pack(self.y, sym),
            "outcome": self.outcome, "adversary": self.adversary,
            "errors_used": self.errors_used, "erasures_used": self.erasures_used,
            "violations": self.violations, "calvin_type": self.calvin_type, "t_star": self.t_star,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Transcript":
        d = json.loads(text)
        if d.get("version") != TRANSCRIPT_VERSION:
            raise ValueError(f"unsupported transcript version {d.get('version')}")
        return cls(trial=d["trial"], seed=d["seed"], message=d["message"],
                   secrets=_unpack(d["secrets"]), x=_unpack(d["x"]), actions=_unpack(d["actions"]),
                   y=_unpack(d["y"]), outcome=d["outcome"], adversary=d["adversary"],
                   errors_used=d["errors_used"], erasures_used=d["erasures_used"],
                   violations=d["violations"], calvin_type=d["calvin_type"], t_star=d["t_star"])


def alice_source(cb: Codebook, message: int, rng: np.random.Generator) -> tuple[CausalSource, np.ndarray]:
    """Transmitter that picks each chunk's secret only when that chunk is first needed."""
    L, K = cb.chunk_len, cb.n_chunks
    secrets = np.full(K, -1, dtype=np.int64)

    def fill(src: CausalSource, j: int) -> None:
        while src.ready < j:
            k = src.ready // L
            s = int(rng.integers(cb.secret_count))
            secrets[k] = s
            src.x[k * L:(k + 1) * L] = cb.table[k, message, s, :]
            src.ready = (k + 1) * L

    return CausalSource(cb.params.n, fill), secrets


def run_trial(cb: Codebook, config: TrialConfig, trial_index: int) -> Transcript:
    P = config.params
    if config.message_policy == "uniform":
        m = int(stream(config.seed, "message", trial_index).integers(cb.message_count))
    else:
        m = int(config.message_policy)
    src, secrets = alice_source(cb, m, stream(config.seed, "alice_secrets", trial_index))
    adv = make_adversary(config.adversary, cb, P, (config.seed, trial_index))
    if config.knows_message:
        adv.message = m
    ch = run_channel(src, adv, P)
    src.ensure(P.n)
    out = bob_decode(cb, ch.y, P)
    ctype, tstar = None, None
    try:
        ctype, tstar = classify_and_find_tstar(CalvinTrajectory.from_words(src.x, ch.y, P), P)
    except DomainError:
        pass
    return Transcript(
        trial=trial_index, seed=config.seed, message=m, secrets=secrets.copy(), x=src.x.copy(),
        actions=ch.actions, y=ch.y, outcome=out.to_dict(), adversary=adv.info(),
        errors_used=ch.budget.errors_used, erasures_used=ch.budget.erasures_used,
        violations=ch.violations, calvin_type=ctype, t_star=tstar,
        coin_log=list(getattr(adv, "coin_log", [])),
    )


@dataclass
class ExperimentSummary:
    trials: int = 0
    decode_success_count: int = 0
    wrong_decode_count: int = 0
    ambiguous_count: int = 0
    exhausted_count: int = 0
    list_size_hist: Counter = field(default_factory=Counter)
    tstar_hist: Counter = field(default_factory=Counter)
    decode_t_hist: Counter = field(default_factory=Counter)
    errors_used_total: int = 0
    errors_used_max: int = 0
    erasures_used_total: int = 0
    erasures_used_max: int = 0
    fallback_count: int = 0
    violation_count: int = 0
    list_bound_checks: int = 0
    list_bound_violations: int = 0
    coin_flips: int = 0
    coin_substitutions: int = 0
    transcripts: list = field(default_factory=list, repr=False)

    def add(self, tr: Transcript, keep: bool = False) -> None:
        self.trials += 1
        kind = tr.outcome["kind"]
        if kind == DECODED:
            if tr.outcome["message"] == tr.message:
                self.decode_success_count += 1
            else:
                self.wrong_decode_count += 1
            self.decode_t_hist[tr.outcome["t"]] += 1
        elif kind == AMBIGUOUS:
            self.ambiguous_count += 1
        elif kind == EXHAUSTED:
            self.exhausted_count += 1
        for att in tr.outcome["trace"]:
            size = len(att["listed"])
            self.list_size_hist[size] += 1
            if att["list_bound"] is not None:
                self.list_bound_checks += 1
                if size > att["list_bound"]:
                    self.list_bound_violations += 1
        if tr.t_star is not None:
            self.tstar_hist[tr.t_star] += 1
        self.errors_used_total += tr.errors_used
        self.errors_used_max = max(self.errors_used_max, tr.errors_used)
        self.erasures_used_total += tr.erasures_used
        self.erasures_used_max = max(self.erasures_used_max, tr.erasures_used)
        self.fallback_count += int(bool(tr.adversary.get("fallback", False)))
        self.violation_count += tr.violations
        self.coin_flips += len(tr.coin_log)
        self.coin_substitutions += int(sum(tr.coin_log))
        if keep:
            self.transcripts.append(tr)

    def merge(self, other: "ExperimentSummary") -> "ExperimentSummary":
        out = ExperimentSummary()
        for f in self.__dataclass_fields__:
            a, b = getattr(self, f), getattr(other, f)
            if f.endswith("_max"):
                setattr(out, f, max(a, b))
            elif f == "transcripts":
                out.transcripts = sorted(a + b, key=lambda t: t.trial)
            else:
                setattr(out, f, a + b)
        return out

    @property
    def failure_count(self) -> int:
        return self.trials - self.decode_success_count

    def to_dict(self) -> dict:
        def hist(c: Counter) -> dict:
            return {str(k): c[k] for k in sorted(c)}

        n = max(self.trials, 1)
        return {
            "trials": self.trials,
            "decode_success_count": self.decode_success_count,
            "wrong_decode_count": self.wrong_decode_count,
            "ambiguous_count": self.ambiguous_count,
            "exhausted_count": self.exhausted_count,
            "list_size_hist": hist(self.list_size_hist),
            "tstar_hist": hist(self.tstar_hist),
            "decode_t_hist": hist(self.decode_t_hist),
            "budget": {
                "errors_used_mean": self.errors_used_total / n, "errors_used_max": self.errors_used_max,
                "erasures_used_mean": self.erasures_used_total / n, "erasures_used_max": self.erasures_used_max,
            },
            "fallback_count": self.fallback_count,
            "violation_count": self.violation_count,
            "list_bound_checks": self.list_bound_checks,
            "list_bound_violations": self.list_bound_violations,
            "coin_flips": self.coin_flips,
            "coin_substitutions": self.coin_substitutions,
        }


_CB_CACHE: dict = {}


def _codebook_for(config: TrialConfig) -> Codebook:
    key = (config.params, config.code_seed)
    cb = _CB_CACHE.get(key)
    if cb is None:
        _CB_CACHE.clear()
        cb = generate_codebook(config.params, config.code_seed)
        _CB_CACHE[key] = cb
    return cb


def _run_block(config: TrialConfig, lo: int, hi: int, keep: bool, cb: Codebook | None = None) -> ExperimentSummary:
    cb = cb or _codebook_for(config)
    s = ExperimentSummary()
    for i in range(lo, hi):
        s.add(run_trial(cb, config, i), keep)
    return s


def run_experiment(config: TrialConfig, cb: Codebook | None = None, workers: int = 1,
                   keep_transcripts: bool = False) -> ExperimentSummary:
    """Run trials 0..trials-1. The result does not depend on ``workers``."""
    if config.trials == 0:
        return ExperimentSummary()
    if cb is None:
        cb = _codebook_for(config)
    if workers <= 1:
        return _run_block(config, 0, config.trials, keep_transcripts, cb)
    step = math.ceil(config.trials / workers)
    blocks = [(lo, min(config.trials, lo + step)) for lo in range(0, config.trials, step)]
    total = ExperimentSummary()
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futs = [ex.submit(_run_block, config, lo, hi, keep_transcripts) for lo, hi in blocks]
        for f in futs:
            total = total.merge(f.result())
    return total


@dataclass(frozen=True)
class ErrorRate:
    rate: float
    low: float
    high: float


def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("Wilson interval needs at least one trial")
    ph = k / n
    den = 1.0 + z * z / n
    centre = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    # rounding can push an endpoint past the estimate at k = 0 or k = n
    return max(0.0, min(ph, centre - half)), min(1.0, max(ph, centre + half))


def summarize_error_rate(summary: ExperimentSummary) -> ErrorRate:
    """Decoding failure rate with its 95% Wilson score interval."""
    if summary.trials <= 0:
        raise ValueError("cannot summarize an experiment with zero trials")
    lo, hi = wilson_interval(summary.failure_count, summary.trials)
    return ErrorRate(summary.failure_count / summary.trials, lo, hi)
