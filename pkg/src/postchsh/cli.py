"""Command-line front end.

Subcommands: ``exact``, ``sample``, ``sweep``, ``lhv``, ``cirelson``.  On
failure a JSON object ``{"error": ..., "message": ...}`` is written to
stderr and the exit code is 2.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .coincidence import counts_to_string, load_counts
from .inequalities import (
    ALL_SIGNS,
    CHSH_CIRELSON,
    CHSHParams,
    DichotomicObservable,
    canonical_settings,
    cirelson_norm,
    cirelson_norms,
    cirelson_norm_via_square,
    lhv_combination,
    lhv_max,
)
from .pipeline import DEFAULT_THETA, SWEEP_HEADER, analyze_table, exact_table, report_dict, sampled_table, sweep
from .postselect import LabelingStrategy


class CLIError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(message)


def _visibility(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"visibility must be in [0, 1], got {text}")
    return v


def _positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def _nonneg_int(text):
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return n


def _finite(text):
    x = float(text)
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text}")
    return x


def _strategy(text):
    try:
        return LabelingStrategy.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _sign(text):
    v = int(text)
    if v not in (-1, 1):
        raise argparse.ArgumentTypeError(f"sign must be -1 or 1, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", type=Path, help="write the report here instead of stdout")

    state = argparse.ArgumentParser(add_help=False)
    state.add_argument("--theta", type=_finite, default=DEFAULT_THETA,
                       help="weight angle of cos(t)|+++> + sin(t)|---> (default pi/4)")
    state.add_argument("--visibility", type=_visibility, default=1.0)
    state.add_argument("--strategy", type=_strategy, default=LabelingStrategy.parse("outcome"),
                       help="'outcome' or 'fixed:<loc>' with a 0-based location")
    state.add_argument("--use-bound", action="store_true",
                       help="use the six-term bound for both P_zx and P_xz in the CH value")

    p = _Parser(prog="postchsh", description="Postselected CHSH on a three-qubit GHZ state.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("exact", parents=[common, state], help="exact analysis, no sampling")

    sp = sub.add_parser("sample", parents=[common, state], help="sampled coincidence experiment")
    sp.add_argument("--shots", type=_positive_int, default=100_000, help="shots per setting")
    sp.add_argument("--seed", type=_nonneg_int, default=0)
    sp.add_argument("--counts-out", type=Path, help="write the coincidence counts file here")
    sp.add_argument("--counts-in", type=Path, help="analyze this counts file instead of sampling")

    sw = sub.add_parser("sweep", parents=[common, state], help="exact values over a parameter grid")
    sw.add_argument("--param", choices=("visibility", "theta"), default="visibility")
    sw.add_argument("--from", dest="start", type=_finite, default=0.0)
    sw.add_argument("--to", dest="stop", type=_finite, default=1.0)
    sw.add_argument("--steps", type=int, default=11)

    sub.add_parser("lhv", parents=[common], help="enumerate deterministic local strategies")

    cp = sub.add_parser("cirelson", parents=[common], help="operator norm of the CHSH operator")
    cp.add_argument("--angles", type=_finite, nargs=8,
                    metavar=("tA", "pA", "ta", "pa", "tB", "pB", "tb", "pb"),
                    help="polar/azimuthal angle pairs for A, a, B, b (default: canonical)")
    cp.add_argument("--random", type=_positive_int, metavar="N",
                    help="also check N random settings")
    cp.add_argument("--seed", type=_nonneg_int, default=0)
    cp.add_argument("--m", type=_sign, default=1)
    cp.add_argument("--n", type=_sign, default=1)
    return p


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _fmt(x, width=10):
    return " " * (width - 4) + "n/a" if x is None else f"{x:{width}.6f}"


def _report_text(rep: dict) -> str:
    lines = []
    sp = rep["state_params"]
    theta = "n/a" if sp["theta"] is None else f"{sp['theta']:.6f}"
    lines.append(f"theta={theta}  visibility={rep['visibility']}  strategy={rep['strategy']}"
                 + (f"  shots={rep['shots']}  seed={rep['seed']}" if rep["shots"] is not None else ""))
    lines.append("")
    lines.append("correlation      value    std.err")
    for k, c in rep["terms"]["correlations"].items():
        lines.append(f"  {k:<8}{_fmt(c['value'])} {_fmt(c['standard_error'])}")
    b = rep["bounds"]["chsh"]
    lines.append(f"  CHSH    {_fmt(rep['chsh_value'])} {_fmt(rep['chsh_standard_error'])}"
                 f"   bounds: lhv {b['lhv']:g}, cirelson {b['cirelson']:.6f}, max {b['max']:g}")
    lines.append("")
    lines.append("CH probability   value    std.err")
    for k, c in rep["terms"]["ch_probabilities"].items():
        lines.append(f"  {k:<8}{_fmt(c['value'])} {_fmt(c['standard_error'])}")
    six = rep["terms"]["six_term_bound"]
    lines.append(f"  6-term  {_fmt(six['value'])} {_fmt(six['standard_error'])}   (upper bound for P_zx, P_xz)")
    b = rep["bounds"]["ch"]
    lines.append(f"  CH      {_fmt(rep['ch_value'])} {_fmt(rep['ch_standard_error'])}"
                 f"   bounds: lhv {b['lhv']:g}, cirelson {b['cirelson']:.6f}, max {b['max']:g}")
    return "\n".join(lines) + "\n"


def _report_csv(rep: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("quantity", "value", "standard_error"))
    for k, c in rep["terms"]["correlations"].items():
        w.writerow((k, repr(c["value"]), "" if c["standard_error"] is None else repr(c["standard_error"])))
    for k, c in rep["terms"]["ch_probabilities"].items():
        w.writerow((k, repr(c["value"]), "" if c["standard_error"] is None else repr(c["standard_error"])))
    w.writerow(("chsh", repr(rep["chsh_value"]), "" if rep["chsh_standard_error"] is None else repr(rep["chsh_standard_error"])))
    w.writerow(("ch", repr(rep["ch_value"]), "" if rep["ch_standard_error"] is None else repr(rep["ch_standard_error"])))
    return buf.getvalue()


def _render_report(rep: dict, fmt: str) -> str:
    if fmt == "json":
        return _dumps(rep)
    if fmt == "csv":
        return _report_csv(rep)
    return _report_text(rep)


def cmd_exact(args) -> str:
    table = exact_table(args.theta, args.visibility)
    a = analyze_table(table, args.strategy, args.use_bound)
    rep = report_dict(a, theta=args.theta, visibility=args.visibility, strategy=args.strategy)
    return _render_report(rep, args.format)


def cmd_sample(args) -> str:
    if args.counts_in is not None:
        table = load_counts(args.counts_in)
        theta = visibility = seed = None
        shots = {s: int(table.total_shots(s)) for s in table.settings}
    else:
        table = sampled_table(args.theta, args.visibility, args.shots, args.seed)
        theta, visibility, seed, shots = args.theta, args.visibility, args.seed, args.shots
    if args.counts_out is not None:
        args.counts_out.write_text(counts_to_string(table), encoding="utf-8")
    a = analyze_table(table, args.strategy, args.use_bound)
    rep = report_dict(a, theta=theta, visibility=visibility, strategy=args.strategy,
                      shots=shots, seed=seed)
    if args.counts_in is not None:
        rep["counts_file"] = str(args.counts_in)
    return _render_report(rep, args.format)


def cmd_sweep(args) -> str:
    rows = sweep(args.param, args.start, args.stop, args.steps, theta=args.theta,
                 visibility=args.visibility, strategy=args.strategy)
    if args.format == "json":
        return _dumps([dict(zip(SWEEP_HEADER, r)) for r in rows])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow((r[0],) + tuple(repr(float(x)) for x in r[1:]))
    return buf.getvalue()


def cmd_lhv(args) -> str:
    per_sign = []
    for params in ALL_SIGNS:
        best, top = lhv_max(params)
        per_sign.append({"m": params.m, "n": params.n, "max_abs": best,
                         "extremal": [[v.v_A, v.v_a, v.v_B, v.v_b] for v in top]})
    default = per_sign[0]
    if args.format == "json":
        return _dumps({"lhv_max": default["max_abs"], "per_sign": per_sign})
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("m", "n", "v_A", "v_a", "v_B", "v_b", "value"))
        for params in ALL_SIGNS:
            for v in lhv_max(params)[1]:
                w.writerow((params.m, params.n, v.v_A, v.v_a, v.v_B, v.v_b, lhv_combination(v, params)))
        return buf.getvalue()
    lines = [f"{default['max_abs']}", f"extremal assignments (m=1, n=1), value +2:",
             "  v_A v_a v_B v_b"]
    for v in default["extremal"]:
        lines.append("  " + " ".join(f"{x:+d}".rjust(3) for x in v))
    lines.append("max |value| per (m, n): " + ", ".join(
        f"({s['m']:+d},{s['n']:+d})->{s['max_abs']}" for s in per_sign))
    return "\n".join(lines) + "\n"


def cmd_cirelson(args) -> str:
    params = CHSHParams(args.m, args.n)
    if args.angles:
        obs = [DichotomicObservable.from_angles(args.angles[2 * i], args.angles[2 * i + 1]) for i in range(4)]
    else:
        obs = list(canonical_settings())
    norm = cirelson_norm(*obs, params)
    result = {
        "norm": norm,
        "norm_via_square": cirelson_norm_via_square(*obs, params),
        "cirelson_bound": CHSH_CIRELSON,
        "settings": [list(o.bloch) for o in obs],
        "m": params.m,
        "n": params.n,
    }
    if args.random:
        rng = np.random.default_rng(args.seed)
        settings = [[DichotomicObservable.random(rng) for _ in range(4)] for _ in range(args.random)]
        top = float(cirelson_norms(settings, params).max())
        result["random"] = {"count": args.random, "seed": args.seed, "max": top,
                            "all_within_bound": top <= CHSH_CIRELSON + 1e-9}
    if args.format == "json":
        return _dumps(result)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("quantity", "value"))
        w.writerow(("norm", repr(norm)))
        w.writerow(("norm_via_square", repr(result["norm_via_square"])))
        if args.random:
            w.writerow(("random_max", repr(result["random"]["max"])))
        return buf.getvalue()
    lines = [f"{norm:.12f}", f"via C^2 identity: {result['norm_via_square']:.12f}",
             f"Cirel'son bound:  {CHSH_CIRELSON:.12f}"]
    if args.random:
        r = result["random"]
        lines.append(f"random settings: {r['count']} (seed {r['seed']}), max norm {r['max']:.12f}, "
                     f"all within bound: {r['all_within_bound']}")
    return "\n".join(lines) + "\n"


COMMANDS = {"exact": cmd_exact, "sample": cmd_sample, "sweep": cmd_sweep,
            "lhv": cmd_lhv, "cirelson": cmd_cirelson}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text = COMMANDS[args.command](args)
        _emit(text, args.out)
    except CLIError as e:
        return _fail("usage", str(e))
    except (ValueError, KeyError, OSError, ArithmeticError) as e:
        return _fail(type(e).__name__, str(e.args[0]) if isinstance(e, KeyError) and e.args else str(e))
    return 0


def _fail(kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return 2


if __name__ == "__main__":
    sys.exit(main())
