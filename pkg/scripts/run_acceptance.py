"""Run the acceptance criteria and write a JSON report.

Usage:
    python3 scripts/run_acceptance.py                 # all criteria, full budgets
    python3 scripts/run_acceptance.py --id 5 --id 10  # a subset
    OVERLAPS_BUDGET_SCALE=0.1 python3 scripts/run_acceptance.py   # quick look, reduced MC budgets
"""
import argparse
import json
import sys
import time
from pathlib import Path

from overlaps.suites import SUITES, run_suite


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--suite", default="acceptance", choices=sorted(SUITES))
    p.add_argument("--id", action="append", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default="results/acceptance.json")
    args = p.parse_args()

    t0 = time.perf_counter()
    results = []
    ids = args.id if args.suite == "acceptance" else [None]
    for cid in ids or list(SUITES["acceptance"]):
        for r in run_suite(args.suite, [cid] if cid else None, threads=args.threads):
            print(r.line(), flush=True)
            results.append(r)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"suite": args.suite, "seconds": time.perf_counter() - t0,
                               "passed": all(r.passed for r in results),
                               "criteria": [r.as_dict() for r in results]}, indent=2, default=str) + "\n")
    print(f"report: {out}")
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
