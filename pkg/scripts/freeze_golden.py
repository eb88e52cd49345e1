"""Run the pre-registered oracle computations once and freeze their results under tests/golden/.

Derived constants come from the arbitrary-precision reference code in
tests/oracles.py. Monte Carlo counts come from seeded runs of the frozen toy
configurations; the acceptance tests rerun them and demand exact equality.

    python3 scripts/freeze_golden.py [--only derived|mc]
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "tests" / "golden"
sys.path.insert(0, str(ROOT / "tests"))

import mpmath as mp  # noqa: E402

import oracles  # noqa: E402

ACHIEVABILITY = {
    "q": 2, "p": 0.05, "pstar": 0.05, "eps": 0.3, "n": 1600, "chunk_len": 4,
    "messages": 4, "secrets": 2, "trials": 1000, "seed": 20240601,
}
ACH_ADVERSARIES = ["null", "uniform_random", "front_loaded", "greedy_push"]

CONVERSE = {
    "q": 2, "p": 0.237, "pstar": 0.0, "eps": 0.025, "n": 128, "chunk_len": 1,
    "messages": 8192, "secrets": 1, "trials": 10000, "seed": 3,
}
CONV_ADVERSARIES = ["null", "uniform_random", "babble_push"]
COIN_TRIALS = 250


def derived() -> dict:
    f = lambda v: float(v)  # noqa: E731
    caps = {}
    for q, p, ps in [(2, 0.1, 0.0), (2, 0.125, 0.0), (2, 0.2, 0.0), (2, 0.237, 0.0),
                     (4, 0.1, 0.05), (16, 0.1, 0.05), (256, 0.1, 0.05), (65536, 0.1, 0.05),
                     (3, 0.1, 0.1), (5, 0.05, 0.2)]:
        v, x = oracles.capacity_mp(q, p, ps)
        caps[f"{q},{p},{ps}"] = {"value": f(v), "argmin_pbar": None if x is None else f(x)}
    return {
        "entropy_2_0.25": f(oracles.entropy_mp(mp.mpf("0.25"), 2)),
        "ball_4_1_3": oracles.ball_bruteforce(4, 1, 3),
        "rate_term_2_0.1_0_at_0.05": f(oracles.rate_mp(mp.mpf("0.05"), 2, 0.1, 0.0)),
        "capacity": caps,
    }


def _pbar_opt(cfg):
    return float(oracles.capacity_mp(cfg["q"], cfg["p"], cfg["pstar"])[1])


def mc() -> dict:
    from causalchan.sim import config_from_mapping, run_experiment

    out = {"achievability": {"config": ACHIEVABILITY, "runs": {}},
           "converse": {"config": CONVERSE, "runs": {}}}
    keep = ["trials", "decode_success_count", "wrong_decode_count", "ambiguous_count", "exhausted_count",
            "violation_count", "fallback_count", "list_bound_checks", "list_bound_violations",
            "coin_flips", "coin_substitutions", "errors_used_max", "erasures_used_max"]

    def run(cfg, adv):
        t = time.time()
        s = run_experiment(config_from_mapping({**cfg, "adversary": adv})).to_dict()
        flat = {**s, **s["budget"]}
        print(f"  {adv['kind']}: {time.time() - t:.1f}s", flush=True)
        return {k: flat[k] for k in keep}

    for kind in ACH_ADVERSARIES:
        out["achievability"]["runs"][kind] = run(ACHIEVABILITY, {"kind": kind})
    pbar = _pbar_opt(CONVERSE)
    out["converse"]["pbar"] = pbar
    for kind in CONV_ADVERSARIES:
        adv = {"kind": kind, "pbar": pbar} if kind == "babble_push" else {"kind": kind}
        out["converse"]["runs"][kind] = run(CONVERSE, adv)
    coin_cfg = {**CONVERSE, "trials": COIN_TRIALS, "seed": 11}
    out["coins"] = {"config": coin_cfg, "pbar": pbar,
                    "run": run(coin_cfg, {"kind": "babble_push", "pbar": pbar})}
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--only", choices=["derived", "mc"])
    args = ap.parse_args()
    GOLDEN.mkdir(parents=True, exist_ok=True)
    if args.only in (None, "derived"):
        (GOLDEN / "derived.json").write_text(json.dumps(derived(), indent=2, sort_keys=True) + "\n")
        print("wrote derived.json")
    if args.only in (None, "mc"):
        (GOLDEN / "monte_carlo.json").write_text(json.dumps(mc(), indent=2, sort_keys=True) + "\n")
        print("wrote monte_carlo.json")


if __name__ == "__main__":
    main()
