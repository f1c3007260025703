"""Command-line front end.

    laxgrid run --config exp.cfg [--map SPEC --orders 1,2,3 --mode cyclic --out DIR]
    laxgrid oracle <suite>

`run` executes the configured experiment, writes report.json, the CSVs, and
the figures into the output directory, and prints the report to stdout.
`oracle` runs one of the brute-force self-check suites (or `all`) and prints
its JSON summary.  Exit status: 0 on success, 2 for configuration problems,
1 for pipeline failures (reported as {"error": <exception name>, ...}).
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, LaxgridError
from .lax import MODES
from .oracles import ORACLE_SUITES, run_oracle
from .report import ExperimentConfig, report_bytes, run_experiment


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="laxgrid",
        description="dyadic-grid permutation approximations of measure-preserving maps",
    )
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment and write its report")
    r.add_argument("--config", metavar="FILE", help="flat key=value config file")
    r.add_argument("--map", dest="map_spec", metavar="SPEC", help="map spec override")
    r.add_argument("--orders", metavar="LIST", help="comma-separated grid orders")
    r.add_argument("--mode", choices=MODES, help="permutation repair mode")
    r.add_argument("--out", metavar="DIR", help="output directory")
    r.add_argument("--analyses", metavar="LIST", help="comma-separated analyses")
    r.add_argument("--theta", metavar="SPEC", help="target speed, e.g. 1.0/q2")
    r.add_argument("--dim", type=int)
    r.add_argument("--topology", choices=("torus", "cube"))
    r.add_argument("--sampling", type=int, metavar="S")
    r.add_argument("--refine", type=int, metavar="R")
    r.add_argument("--seed", type=int)
    r.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    r.add_argument("--quiet", action="store_true", help="print artifact paths only")

    o = sub.add_parser("oracle", help="run a brute-force self-check suite")
    o.add_argument(
        "suite",
        help=f"one of: {', '.join(sorted(ORACLE_SUITES))}, all",
    )
    return p


def _fail(e: LaxgridError, code: int) -> int:
    print(json.dumps({"error": e.name, "message": str(e)}, sort_keys=True))
    return code


def cmd_run(args) -> int:
    try:
        cfg = (
            ExperimentConfig.from_file(args.config)
            if args.config
            else ExperimentConfig()
        )
        cfg = cfg.override(
            map=args.map_spec,
            orders=args.orders,
            mode=args.mode,
            out=args.out,
            analyses=args.analyses,
            theta=args.theta,
            dim=args.dim,
            topology=args.topology,
            sampling=args.sampling,
            refine=args.refine,
            seed=args.seed,
            figures=0 if args.no_figures else None,
        )
    except ConfigError as e:
        return _fail(e, 2)
    except LaxgridError as e:
        return _fail(e, 1)
    try:
        report = run_experiment(cfg)
    except ConfigError as e:
        return _fail(e, 2)
    except LaxgridError as e:
        return _fail(e, 1)
    if args.quiet:
        for name in report["artifacts"]:
            print(f"{cfg.out}/{name}")
    else:
        sys.stdout.write(report_bytes(report).decode())
    return 0


def cmd_oracle(args) -> int:
    try:
        res = run_oracle(args.suite)
    except ConfigError as e:
        return _fail(e, 2)
    except LaxgridError as e:
        return _fail(e, 1)
    print(json.dumps(res, indent=2, sort_keys=True))
    return 0 if res["passed"] else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "oracle":
        return cmd_oracle(args)
    return 2


if __name__ == "__main__":
    sys.exit(main())
