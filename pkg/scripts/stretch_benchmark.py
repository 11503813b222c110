#!/usr/bin/env python3
"""Large-instance stretch harness.

Runs the full portfolio on eil33-2 and qap10 when their MPS files are
available locally (they are not bundled; fetch them from the MIPLIB 2017
collection). Success means a feasible solution within the time limit;
objective values are reported next to the published references for
context only, since matching them requires an industrial LP core and
identical tie-breaking.

Usage:
    python3 scripts/stretch_benchmark.py [--dir MIPLIB_DIR] [--time-limit 600]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from poutine import (default_portfolio, evaluate, read_instance, read_sol,
                     run_poutine)

REFERENCES = {
    "eil33-2": 1218.09,
    "qap10": 340.00,
}


def find_instance(directory: Path, stem: str) -> Path | None:
    for suffix in (".mps", ".mps.gz"):
        candidate = directory / (stem + suffix)
        if candidate.exists():
            return candidate
    return None


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--dir", default="miplib",
                    help="directory holding the MPS files (default ./miplib)")
    ap.add_argument("--time-limit", type=float, default=600.0)
    ap.add_argument("--threads", type=int, default=8)
    args = ap.parse_args()

    directory = Path(args.dir)
    ran = 0
    failures = 0
    for stem, reference in REFERENCES.items():
        path = find_instance(directory, stem)
        if path is None:
            print(f"{stem}: not found under {directory}, skipping")
            continue
        ran += 1
        print(f"{stem}: loading {path}")
        instance = read_instance(path)
        sol_path = path.with_suffix(".sol")
        t0 = time.monotonic()
        report = run_poutine(instance, default_portfolio(args.threads),
                             time_limit=args.time_limit, sol_path=sol_path,
                             seed=0)
        wall = time.monotonic() - t0
        if report.best is None:
            print(f"{stem}: FAIL - no feasible solution in {wall:.0f}s")
            failures += 1
            continue
        values, stated = read_sol(sol_path.read_text(), instance)
        check = evaluate(instance, values)
        if not check.is_feasible:
            print(f"{stem}: FAIL - written solution re-evaluates infeasible "
                  f"(violation {check.max_violation:.2e})")
            failures += 1
            continue
        print(f"{stem}: PASS - feasible objective {stated:.2f} in {wall:.0f}s "
              f"(published reference {reference:.2f}, informational)")
    if ran == 0:
        print("nothing to run; place eil33-2.mps[.gz] / qap10.mps[.gz] "
              f"under {directory}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
