"""Command-line entry point.

Exit codes:
    analyze:  0 tilt-stable, 1 not tilt-stable, 2 inconclusive, 64 input error
    falsify:  0 no witness found, 3 witness found, 64 input error
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time

from . import analyzer, harness, model, report
from .errors import SchemaError, ValidationError

EXIT_INPUT = 64
EXIT_WITNESS = 3


def _add_common(p):
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--tol-cone", type=float, default=None)
    p.add_argument("--tol-rank", type=float, default=None)
    p.add_argument("--margin", type=float, default=None,
                   help="strict-inequality margin for verdicts")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--budget", type=int, default=200,
                   help="search-budget knob (sample counts)")
    p.add_argument("--grid-h", type=float, default=analyzer.GRID_H,
                   help="stratified sphere-grid resolution")
    p.add_argument("--report", metavar="PATH", default=None,
                   help="write a JSON report here")


def _load(args):
    inst = model.load_instance(args.instance)
    overrides = {}
    if args.tol_cone is not None:
        overrides["tol_cone"] = args.tol_cone
    if args.tol_rank is not None:
        overrides["tol_rank"] = args.tol_rank
    if args.margin is not None:
        overrides["margin_strict"] = args.margin
    changed = {}
    if overrides:
        changed["tol"] = dataclasses.replace(inst.tol, **overrides)
    if args.seed is not None:
        changed["seed"] = args.seed
    if changed:
        inst = dataclasses.replace(inst, **changed)
    return inst


def cmd_analyze(args):
    t0 = time.perf_counter()
    inst = _load(args)
    verdict = analyzer.analyze(inst, budget=args.budget)
    experiment = None
    if args.empirical:
        kappa = verdict.bound_estimate
        experiment = harness.empirical_tilt(
            inst, gamma=args.gamma, r_tilt=args.r_tilt, kappa_theory=kappa,
            witness=verdict.witness if verdict.verdict == analyzer.NOT_TILT_STABLE
            else None)
    timing = {"seconds": time.perf_counter() - t0}
    rep = report.build_report(inst, verdict=verdict, experiment=experiment,
                              timing=timing)
    if args.report:
        report.write_report(rep, args.report)
    print(f"case={verdict.case} verdict={verdict.verdict} "
          f"bound={verdict.bound_estimate}")
    return {"TILT_STABLE": 0, "NOT_TILT_STABLE": 1, "INCONCLUSIVE": 2}[verdict.verdict]


def cmd_falsify(args):
    t0 = time.perf_counter()
    inst = _load(args)
    if args.samples == 0:
        print("warning: --samples 0, vacuously no witness", file=sys.stderr)
        witness = None
    elif args.what == "mscq":
        witness = harness.mscq_falsify(inst, samples=args.samples)
    else:
        witness = harness.neighborhood_falsify(inst, kappa=args.kappa,
                                               eta=args.eta,
                                               samples=args.samples)
    timing = {"seconds": time.perf_counter() - t0}
    rep = report.build_report(inst, falsifier=witness or {"witness": False},
                              timing=timing)
    if args.report:
        report.write_report(rep, args.report)
    if witness is None:
        print("no witness found")
        return 0
    print("witness found")
    return EXIT_WITNESS


def build_parser():
    p = argparse.ArgumentParser(
        prog="socptilt",
        description="Tilt-stability verification for second-order cone "
                    "programs")
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="run the pointbased analysis")
    _add_common(pa)
    pa.add_argument("--empirical", action="store_true",
                    help="also run the tilted-minimization experiment")
    pa.add_argument("--gamma", type=float, default=0.1,
                    help="localization radius of the tilted problems")
    pa.add_argument("--r-tilt", type=float, default=1e-3,
                    help="tilt-grid radius")
    pa.set_defaults(func=cmd_analyze)

    pf = sub.add_parser("falsify", help="sampling falsifiers")
    pf.add_argument("what", choices=["mscq", "neighborhood"])
    _add_common(pf)
    pf.add_argument("--samples", type=int, default=10000)
    pf.add_argument("--kappa", type=float, default=1.0,
                    help="modulus to falsify (neighborhood)")
    pf.add_argument("--eta", type=float, default=1e-2,
                    help="neighborhood radius (neighborhood)")
    pf.set_defaults(func=cmd_falsify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, ValidationError) as e:
        print(f"input error: {e}\n"
              "schema: {n, m, x_base, sigma, f:{terms:[{c,e}]}, "
              "g:[{terms:...}; 1+m entries], tolerances?, seed?}",
              file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
