"""Command line entry point.

Exit codes: 0 a feasible solution was written, 2 none found within the
budget, 3 the instance is proven infeasible, 4 bad input (unreadable or
malformed file, bad arguments).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .mps import MpsParseError, read_instance
from .portfolio import (default_portfolio, diving_portfolio, load_portfolio,
                        run_poutine)


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage, which collides with the
    # "no solution found" code; surface usage problems as input errors.
    def error(self, message):
        raise _CliError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="poutine",
                description="Portfolio MILP heuristic solver (minimization; "
                            "reads MPS, writes a .sol file).")
    p.add_argument("instance", help="path to an .mps or .mps.gz file")
    p.add_argument("--time-limit", type=float, default=600.0,
                   help="wall clock budget in seconds (default 600)")
    p.add_argument("--threads", type=int, default=8,
                   help="worker thread count (default 8)")
    p.add_argument("--seed", type=int, default=0,
                   help="base random seed (default 0)")
    p.add_argument("--output", default=None,
                   help="solution file path (default: instance stem + .sol)")
    p.add_argument("--portfolio", default="default",
                   help="'default', 'diving', or a JSON stage file")
    p.add_argument("--log", default=None,
                   help="write the event log to this file")
    return p


def _default_sol_path(instance_path: Path) -> Path:
    name = instance_path.name
    for suffix in (".mps.gz", ".mps"):
        if name.lower().endswith(suffix):
            name = name[:-len(suffix)]
            break
    else:
        name = instance_path.stem
    return instance_path.with_name(name + ".sol")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.time_limit <= 0:
            raise _CliError("--time-limit must be positive")
        if args.threads < 1:
            raise _CliError("--threads must be >= 1")
        if args.portfolio == "default":
            portfolio = default_portfolio(args.threads)
        elif args.portfolio == "diving":
            portfolio = diving_portfolio(args.threads)
        else:
            portfolio = load_portfolio(args.portfolio)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (OSError, ValueError) as exc:
        print(f"error: bad portfolio file: {exc}", file=sys.stderr)
        return 4

    instance_path = Path(args.instance)
    try:
        instance = read_instance(instance_path)
    except MpsParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (OSError, ValueError) as exc:
        print(f"error: cannot read {instance_path}: {exc}", file=sys.stderr)
        return 4

    sol_path = Path(args.output) if args.output else _default_sol_path(
        instance_path)
    report = run_poutine(instance, portfolio, time_limit=args.time_limit,
                         sol_path=sol_path, log_path=args.log, seed=args.seed)

    if report.proven_infeasible:
        print(f"{instance.name}: proven infeasible "
              f"({report.wall_time:.1f}s)")
    elif report.best is not None:
        print(f"{instance.name}: objective {report.best.objective:.10g} "
              f"(bound {report.best_bound:.10g}, "
              f"{report.wall_time:.1f}s) -> {sol_path}")
    else:
        print(f"{instance.name}: no feasible solution found "
              f"({report.wall_time:.1f}s)")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
