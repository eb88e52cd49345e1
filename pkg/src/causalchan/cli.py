"""Command-line entry point.

Exit codes: 0 success, 1 a checked property or claim failed, 2 usage or
validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import capacity, grid_oracle
from .codec import CodebookTooLarge, generate_codebook, load_codebook, read_header, save_codebook
from .params import ChannelParams, ParameterError
from .qmath import DomainError
from .sim import config_from_mapping, params_from_mapping, run_experiment, summarize_error_rate
from .trajectory import region_curves, sweep
from .verify import check_draw, run_verify, CLAIMS, ClaimResult

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

PARAM_FLAGS = {
    "q": int, "p": float, "pstar": float, "eps": float, "n": int, "theta": float,
    "chunk_len": int, "messages": int, "rate": float, "secrets": int,
}


class UsageError(Exception):
    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError([message])


def build_version() -> str:
    """git describe of the source tree, or the package version outside a checkout."""
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return f"v{__version__}"


# parameter handling


def _add_param_flags(p: argparse.ArgumentParser, rate_flags: bool = True) -> None:
    g = p.add_argument_group("channel parameters")
    g.add_argument("--config", type=Path, help="JSON file with flat keys; flags override it")
    g.add_argument("--q", type=int, help="alphabet size")
    g.add_argument("--p", type=float, help="error fraction")
    g.add_argument("--pstar", type=float, help="erasure fraction")
    g.add_argument("--eps", type=float, help="slack epsilon")
    g.add_argument("--n", type=int, help="block length")
    g.add_argument("--theta", type=float, help="chunk fraction (default eps^2/(9q^2))")
    g.add_argument("--chunk-len", type=int, help="chunk length n*theta, instead of --theta")
    if rate_flags:
        g.add_argument("--messages", type=int, help="message count")
        g.add_argument("--rate", type=float, help="rate; message count is round(q^(nR))")
        g.add_argument("--secrets", type=int, help="secret count per chunk")
    g.add_argument("--theoretical-mode", action="store_true", default=None,
                   help="tie theta, secret count and rate together as in the asymptotic construction")


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError([f"cannot read config {path}: {exc}"])
    if not isinstance(cfg, dict):
        raise UsageError([f"config {path} must be a JSON object"])
    return cfg


def merged_config(args: argparse.Namespace) -> dict:
    """Config file keys overridden by any flag given on the command line."""
    cfg = _load_config(getattr(args, "config", None))
    for key in PARAM_FLAGS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "theoretical_mode", None):
        cfg["theoretical_mode"] = True
    if "theta" in cfg and "chunk_len" in cfg:
        raise UsageError(["give at most one of theta and chunk_len"])
    return cfg


def params_from_args(args: argparse.Namespace, need=("q", "p", "eps", "n")) -> ChannelParams:
    cfg = merged_config(args)
    missing = [k for k in need if k not in cfg]
    if missing:
        raise UsageError([f"missing required parameter {k}" for k in missing])
    try:
        return params_from_mapping(cfg)
    except ParameterError as exc:
        raise UsageError(exc.violations)


# output helpers


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def write_csv(path, header, rows, meta: dict) -> None:
    f = _open_out(path)
    try:
        f.write(f"# params: {json.dumps(meta, sort_keys=True)} build: {build_version()}\n")
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if (isinstance(v, float) and math.isnan(v)) or v is None else v for v in r])
    finally:
        if f is not sys.stdout:
            f.close()


def _emit_json(obj, path=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


# subcommands


def cmd_capacity(args) -> int:
    try:
        res = capacity(args.q, args.p, args.pstar)
    except (DomainError, ValueError) as exc:
        raise UsageError([str(exc)])
    out = {"value": res.value, "argmin_pbar": res.argmin_pbar, "zero_region": res.zero_region}
    if args.grid_oracle:
        gv, gx = grid_oracle(args.q, args.p, args.pstar, points=args.points)
        out["grid_oracle"] = {"value": gv, "argmin_pbar": gx}
    _emit_json(out)
    return EXIT_OK


def cmd_capacity_surface(args) -> int:
    ps = np.linspace(0.0, args.p_max, args.steps)
    pss = np.linspace(0.0, args.pstar_max, args.steps)
    rows = []
    for q in args.q:
        for p in ps:
            for s in pss:
                rows.append([q, f"{p:.10g}", f"{s:.10g}", f"{capacity(q, float(p), float(s)).value:.12g}"])
    meta = {"q": args.q, "steps": args.steps, "p_max": args.p_max, "pstar_max": args.pstar_max}
    write_csv(args.out, ["q", "p", "pstar", "capacity"], rows, meta)
    return EXIT_OK


def _rate_for(P: ChannelParams, override) -> float:
    if override is not None:
        return float(override)
    return capacity(P.q, P.p, P.p_star).value - P.epsilon


def _lambda_profile(path, P: ChannelParams):
    if path is None:
        return None
    text = Path(path).read_text().strip()
    prof = json.loads(text) if text.startswith("[") else np.loadtxt(path, dtype=np.int64, ndmin=1)
    return np.asarray(prof, dtype=np.int64)


def _sweep_rows(P: ChannelParams, rate: float, prof):
    try:
        samples = sweep(P, rate, prof)
    except ValueError as exc:
        raise UsageError([str(exc)])
    rows = []
    for s in samples:
        rows.append([s.t, s.t - s.lambda_t, f"{s.p_bar_t:.12g}",
                     None if s.p_hat_t is None else f"{s.p_hat_t:.12g}",
                     None if s.p_tilde_t is None else f"{s.p_tilde_t:.12g}",
                     int(s.list_condition_holds), int(s.energy_condition_holds)])
    return samples, rows


TRAJ_HEADER = ["t", "t_minus_lambda", "p_bar", "p_hat", "p_tilde", "list_ok", "energy_ok"]


def cmd_trajectory(args) -> int:
    P = params_from_args(args)
    rate = _rate_for(P, args.rate)
    _, rows = _sweep_rows(P, rate, _lambda_profile(args.lambda_profile, P))
    write_csv(args.out, TRAJ_HEADER, rows, {**P.to_dict(), "rate_checked": rate})
    return EXIT_OK


REGION_IDS = [("1", "upper_pt"), ("2", "lower_pt"), ("3", "energy_floor"), ("4", "list_ceiling"),
              ("p_hat", "p_hat")]


def cmd_region(args) -> int:
    P = params_from_args(args)
    rate = _rate_for(P, args.rate)
    c = region_curves(P, rate, stride=args.stride)
    rows = []
    for cid, key in REGION_IDS:
        for t, v in zip(c["t"], c[key]):
            if not np.isnan(v):
                rows.append([cid, int(t), f"{v:.12g}"])
    write_csv(args.out, ["curve", "t", "value"], rows, {**P.to_dict(), "rate_checked": rate})
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = merged_config(args)
    for key in ("trials", "seed", "codebook_seed"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if args.adversary is not None:
        try:
            cfg["adversary"] = json.loads(args.adversary)
        except json.JSONDecodeError:
            cfg["adversary"] = {"kind": args.adversary}
    missing = [k for k in ("q", "p", "eps", "n") if k not in cfg]
    if missing:
        raise UsageError([f"missing required parameter {k}" for k in missing])
    try:
        config = config_from_mapping(cfg)
        summary = run_experiment(config, workers=args.workers, keep_transcripts=args.keep_transcripts)
    except (ParameterError, ValueError, DomainError, CodebookTooLarge) as exc:
        raise UsageError(getattr(exc, "violations", [str(exc)]))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"config": config.to_dict(), "summary": summary.to_dict(), "build": build_version()}
    if summary.trials:
        er = summarize_error_rate(summary)
        doc["error_rate"] = {"rate": er.rate, "wilson95": [er.low, er.high]}
    _emit_json(doc, out / "summary.json")
    if args.keep_transcripts:
        tdir = out / "transcripts"
        tdir.mkdir(exist_ok=True)
        for tr in summary.transcripts:
            (tdir / f"trial_{tr.trial:06d}.json").write_text(tr.to_json(config.params.q) + "\n")
    print(json.dumps(doc["summary"] | {"error_rate": doc.get("error_rate")}, sort_keys=True))
    return EXIT_OK


def cmd_verify(args) -> int:
    scale = 0.5 if args.fault == "halve-margin" else 1.0
    if args.q is not None or args.config is not None:
        return _verify_point(args, scale)
    qs = tuple(args.qs)
    rep = run_verify(qs=qs, draws_per_q=args.draws, seed=args.seed, margin_scale=scale)
    for line in rep.lines():
        print(line)
    if args.report:
        _emit_json(rep.to_dict(), args.report)
    if not rep.passed:
        for name in CLAIMS:
            for ce in rep.results[name].counterexamples:
                print(f"counterexample {name}: {json.dumps(ce, sort_keys=True)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _verify_point(args, scale: float) -> int:
    cfg = merged_config(args)
    if "n" not in cfg and "q" in cfg and "eps" in cfg:
        cfg["n"] = int(math.ceil(9 * cfg["q"] ** 2 / cfg["eps"] ** 2))
        cfg.setdefault("chunk_len", 1)
        cfg.pop("theta", None)
    P = params_from_args(argparse.Namespace(config=None, **{k: cfg.get(k) for k in PARAM_FLAGS},
                                            theoretical_mode=cfg.get("theoretical_mode")))
    rate = _rate_for(P, args.rate)
    samples, rows = _sweep_rows(P, rate, None)
    write_csv(args.out, TRAJ_HEADER, rows, {**P.to_dict(), "rate_checked": rate})
    results = {name: ClaimResult(name) for name in CLAIMS}
    check_draw(P, np.random.default_rng(args.seed), results, scale)
    bad = [s for s in samples if s.p_hat_t is not None and not (s.list_condition_holds and s.energy_condition_holds)]
    failed = [r for r in results.values() if r.failures]
    for r in results.values():
        if r.checks:
            print(f"{'FAIL' if r.failures else 'PASS'} {r.name}: {r.checks} checks, {r.failures} failures",
                  file=sys.stderr)
    return EXIT_FAIL if bad or failed else EXIT_OK


def cmd_codebook_gen(args) -> int:
    P = params_from_args(args)
    errs = P.coding_violations()
    if errs:
        raise UsageError(errs)
    try:
        cb = generate_codebook(P, args.seed)
    except CodebookTooLarge as exc:
        raise UsageError([str(exc)])
    save_codebook(cb, args.out)
    _emit_json({"path": str(args.out), **read_header(args.out)})
    return EXIT_OK


def cmd_codebook_inspect(args) -> int:
    try:
        hdr = read_header(args.file)
        cb = load_codebook(args.file)
    except (OSError, ValueError) as exc:
        raise UsageError([str(exc)])
    counts = np.bincount(cb.table.reshape(-1).astype(np.int64), minlength=cb.q)
    _emit_json({**hdr, "symbol_counts": counts.tolist(), "table_shape": list(cb.table.shape)})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="causalchan", allow_abbrev=False,
                 description="Capacity, trajectories and simulation for q-ary causal adversarial channels.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--json-diagnostics", action="store_true",
                    help="on validation failure print a JSON diagnostic to stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("capacity", help="capacity value and minimizing pbar as JSON", allow_abbrev=False)
    p.add_argument("--q", type=int, required=True, help="alphabet size")
    p.add_argument("--p", type=float, required=True, help="error fraction")
    p.add_argument("--pstar", type=float, default=0.0, help="erasure fraction")
    p.add_argument("--grid-oracle", action="store_true", help="also report a brute-force grid minimum")
    p.add_argument("--points", type=int, default=10**6, help="grid size for --grid-oracle")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("capacity-surface", help="CSV of capacity over a (p, pstar) grid", allow_abbrev=False)
    p.add_argument("--q", type=int, nargs="+", default=[2], help="alphabet sizes")
    p.add_argument("--steps", type=int, default=51, help="grid points per axis")
    p.add_argument("--p-max", type=float, default=0.5, help="largest p on the grid")
    p.add_argument("--pstar-max", type=float, default=1.0, help="largest pstar on the grid")
    p.add_argument("--out", type=Path, help="output CSV (default stdout)")
    p.set_defaults(func=cmd_capacity_surface)

    p = sub.add_parser("trajectory", help="CSV of trajectory values at every chunk end", allow_abbrev=False)
    _add_param_flags(p)
    p.add_argument("--lambda-profile", type=Path, help="erasure counts per chunk end (JSON list or one per line)")
    p.add_argument("--out", type=Path, help="output CSV (default stdout)")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("region", help="CSV of the curves bounding p_t and p_hat", allow_abbrev=False)
    _add_param_flags(p)
    p.add_argument("--stride", type=int, default=1, help="evaluate every STRIDE positions")
    p.add_argument("--out", type=Path, help="output CSV (default stdout)")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("simulate", help="Monte Carlo trials; writes summary.json", allow_abbrev=False)
    _add_param_flags(p)
    p.add_argument("--adversary", help='adversary kind or JSON spec, e.g. \'{"kind": "babble_push", "pbar": 0}\'')
    p.add_argument("--trials", type=int, help="number of trials")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--codebook-seed", type=int, help="codebook seed (default: master seed)")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--keep-transcripts", action="store_true", help="write one JSON transcript per trial")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="numeric claim suite, or one parameter point with --q", allow_abbrev=False)
    _add_param_flags(p)
    p.add_argument("--qs", type=int, nargs="+", default=[2, 3, 4], help="alphabet sizes for the grid")
    p.add_argument("--draws", type=int, default=200, help="random draws per alphabet size")
    p.add_argument("--seed", type=int, default=0, help="seed for the draws")
    p.add_argument("--fault", choices=["halve-margin"], help="inject a fault to test the harness")
    p.add_argument("--report", type=Path, help="write the full JSON report here")
    p.add_argument("--out", type=Path, help="single-point table CSV (default stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("codebook", help="generate or inspect a stored codebook", allow_abbrev=False)
    cs = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    g = cs.add_parser("gen", help="generate and save a codebook", allow_abbrev=False)
    _add_param_flags(g)
    g.add_argument("--seed", type=int, default=0, help="codebook seed")
    g.add_argument("--out", type=Path, required=True, help="output file")
    g.set_defaults(func=cmd_codebook_gen)
    i = cs.add_parser("inspect", help="print a stored codebook's header", allow_abbrev=False)
    i.add_argument("file", type=Path)
    i.set_defaults(func=cmd_codebook_inspect)
    return ap


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    want_json = "--json-diagnostics" in argv
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        if want_json:
            print(json.dumps({"error": "usage", "violations": exc.violations}), file=sys.stderr)
        else:
            for v in exc.violations:
                print(f"causalchan: error: {v}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
