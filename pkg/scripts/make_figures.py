"""Write the theory and Monte Carlo tables behind each figure.

Usage:
    python3 scripts/make_figures.py --out results/figures            # desk-scale budgets
    python3 scripts/make_figures.py --ids 3 5 --budget 1e5 --threads 8
    python3 scripts/make_figures.py --theory-only                    # curves only, no sampling
"""
import argparse
import time
from pathlib import Path

from overlaps import io as tio
from overlaps.figures import FIGURES, MCOptions


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ids", type=int, nargs="*", default=sorted(FIGURES))
    p.add_argument("--budget", type=lambda s: int(float(s)), default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--theory-only", action="store_true")
    p.add_argument("--out", default="results/figures")
    args = p.parse_args()

    out = Path(args.out)
    budget = 0 if args.theory_only else args.budget
    opts = MCOptions(budget=budget, seed=args.seed, threads=args.threads)
    for fid in args.ids:
        t0 = time.perf_counter()
        tables = FIGURES[fid](opts)
        for name, t in tables.items():
            tio.write(out / name, t.rows, dict(t.meta, script="make_figures.py"), "csv", t.columns)
        print(f"figure {fid}: {', '.join(tables)} [{time.perf_counter() - t0:.1f}s]", flush=True)


if __name__ == "__main__":
    main()
