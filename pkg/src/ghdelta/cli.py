"""Command-line front end.

    ghdelta classify SCENARIO [--json]
    ghdelta sweep SCENARIO --out PATH
    ghdelta selftest

Exit codes: 0 success, 1 selftest failure, 2 scenario errors, 3 evaluation
errors, 4 output-write failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import __version__
from .derivative import Tolerances
from .errors import EvaluationError, GhDeltaError, PointNotApplicable, ScenarioError
from .report import SWEEP_HEADER, analyze, classify_header, classify_rows, sweep_rows, write_csv
from .scenario import Scenario, load_scenario, parse_alpha_grid
from .timescale import SamplingPlan

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_SCENARIO = 2
EXIT_EVAL = 3
EXIT_WRITE = 4


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("overrides")
    g.add_argument("--alpha-levels", metavar="LEVELS",
                   help="level count (e.g. 11) or comma list (e.g. 0,0.5,1)")
    g.add_argument("--h0", type=float, help="first sampling offset")
    g.add_argument("--ratio", type=float, help="geometric ratio of offsets, in (0, 1)")
    g.add_argument("--count", type=int, help="number of offsets per side")
    g.add_argument("--tail-window", type=int, help="samples used for limit verdicts")
    g.add_argument("--eps-lim", type=float, help="tail spread accepted as convergence")
    g.add_argument("--eps-cluster", type=float, help="gap separating cluster points")
    p.add_argument("--dump-normalized", action="store_true",
                   help="print the normalized scenario as JSON and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghdelta", description="gH delta-derivatives of fuzzy functions on time scales")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="print one report row per requested point")
    p.add_argument("scenario")
    p.add_argument("--json", action="store_true", help="print full structured reports instead of CSV")
    _common(p)

    p = sub.add_parser("sweep", help="write a per-(t0, alpha) CSV for the requested points")
    p.add_argument("scenario")
    p.add_argument("--out", required=True, help="output CSV path ('-' for stdout)")
    _common(p)

    p = sub.add_parser("selftest", help="run the bundled acceptance fixtures")
    p.add_argument("--only", help="comma list of criterion numbers")
    p.add_argument("--h0", type=float)
    p.add_argument("--ratio", type=float)
    p.add_argument("--count", type=int)
    p.add_argument("--tail-window", type=int)
    p.add_argument("--eps-lim", type=float)
    p.add_argument("--eps-cluster", type=float)
    p.add_argument("--qiu-lower", help="replacement lower expression for the threshold fixture")
    p.add_argument("--qiu-upper", help="replacement upper expression for the threshold fixture")
    return parser


def _load(args) -> Scenario:
    scn = load_scenario(args.scenario)
    grid = parse_alpha_grid(args.alpha_levels) if args.alpha_levels else None
    return scn.with_overrides(
        alpha_levels=grid, h0=args.h0, ratio=args.ratio, count=args.count,
        tail_window=args.tail_window, eps_lim=args.eps_lim, eps_cluster=args.eps_cluster,
    )


def _err(msg: str) -> None:
    print(f"ghdelta: error: {msg}", file=sys.stderr)


def cmd_classify(args) -> int:
    scn = _load(args)
    if args.dump_normalized:
        print(json.dumps(scn.to_dict(), indent=2))
        return EXIT_OK
    results = analyze(scn)
    if args.json:
        print(json.dumps([r.to_dict() for r in results], indent=2, allow_nan=False, default=_json_default))
        return EXIT_OK
    write_csv(sys.stdout, classify_header(scn), classify_rows(scn, results))
    return EXIT_OK


def _json_default(o):
    if hasattr(o, "value"):
        return o.value
    return float(o)


def cmd_sweep(args) -> int:
    scn = _load(args)
    if args.dump_normalized:
        print(json.dumps(scn.to_dict(), indent=2))
        return EXIT_OK
    rows = sweep_rows(scn, analyze(scn))
    if args.out == "-":
        write_csv(sys.stdout, SWEEP_HEADER, rows)
        return EXIT_OK
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(fh, SWEEP_HEADER, rows)
    except OSError as exc:
        _err(f"cannot write {args.out}: {exc.strerror or exc}")
        return EXIT_WRITE
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import SelftestConfig, run

    base_plan, base_tol = SamplingPlan(), Tolerances()
    plan = SamplingPlan(
        h0=args.h0 if args.h0 is not None else base_plan.h0,
        ratio=args.ratio if args.ratio is not None else base_plan.ratio,
        count=args.count if args.count is not None else base_plan.count,
        tail_window=args.tail_window if args.tail_window is not None else base_plan.tail_window,
    )
    tol = Tolerances(
        eps_lim=args.eps_lim if args.eps_lim is not None else base_tol.eps_lim,
        eps_cluster=args.eps_cluster if args.eps_cluster is not None else base_tol.eps_cluster,
    )
    only = {int(x) for x in args.only.split(",")} if args.only else None
    cfg = SelftestConfig(plan=plan, tol=tol, qiu_lower=args.qiu_lower, qiu_upper=args.qiu_upper)
    results = run(cfg, only)
    for r in results:
        print(r.line())
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_SELFTEST if failed else EXIT_OK


COMMANDS = {"classify": cmd_classify, "sweep": cmd_sweep, "selftest": cmd_selftest}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        _err(f"scenario file not found: {exc.filename}")
        return EXIT_SCENARIO
    except (ScenarioError, PointNotApplicable) as exc:
        _err(str(exc))
        return EXIT_SCENARIO
    except EvaluationError as exc:
        _err(f"evaluation failed: {exc}")
        return EXIT_EVAL
    except GhDeltaError as exc:
        _err(f"analysis failed: {exc}")
        return EXIT_EVAL
    except ValueError as exc:  # invalid override values (e.g. ratio >= 1)
        _err(str(exc))
        return EXIT_SCENARIO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
