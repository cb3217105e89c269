"""Command-line front end.

Commands: ``eval`` and ``scan`` (formulas at points or on a grid), ``mc``
(Monte Carlo conditional overlaps), ``compare`` (acceptance and
cross-check suites, JSON report) and ``figure`` (data files per figure).

Exit codes: 0 success, 2 domain error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import os
import json
import math
import shlex
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import asymptotics as asy
from . import finite_n as fn
from . import io as tio
from .ensembles import ComplexPoint, EnsembleSpec, Kind, depletion_point, snh_point, wnh_point, wnh_tau
from .specfun import DomainError, NumericalFailure

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERIC = 0, 2, 3


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from None
    return a, b


def _grid(text: str):
    try:
        xs, ys = text.split(",")
        out = []
        for part in (xs, ys):
            a, b, c = part.split(":")
            out.append(np.linspace(float(a), float(b), int(c)))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x0:x1:nx,y0:y1:ny', got {text!r}") from None
    return out


def _budget(text: str) -> int:
    v = float(text)
    if v != int(v) or v < 0:
        raise argparse.ArgumentTypeError(f"budget must be a non-negative integer, got {text!r}")
    return int(v)


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="overlaps", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--ensemble", choices=[k.value for k in Kind], default="eginue")
        sp.add_argument("--n", type=int, default=10)
        sp.add_argument("--tau", type=_floats, default=None,
                        help="ellipticity; figures 4 and 5 take a comma list")
        sp.add_argument("--alpha", type=float, default=None, help="WNH parameter, tau = 1 - (pi alpha)^2/(2n)")
        sp.add_argument("--out", type=str, default=None, help="output file (directory for 'figure')")
        sp.add_argument("--format", choices=["csv", "json"], default="csv")

    def mc_flags(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--streams", type=int, default=8)
        sp.add_argument("--threads", type=int, default=None, help="worker processes (env OVERLAPS_THREADS)")
        sp.add_argument("--budget", type=_budget, default=None, help="number of sampled matrices")
        sp.add_argument("--window", choices=["box", "knearest"], default="box")
        sp.add_argument("--k", type=int, default=1000)
        sp.add_argument("--h", type=_pair, default=None, metavar="HX,HY",
                        help="box half-widths in z units (default +-1/sqrt(N) in the regime coordinates)")

    for name in ("eval", "scan"):
        sp = sub.add_parser(name, help="evaluate formulas" if name == "eval" else "evaluate on a grid")
        common(sp)
        sp.add_argument("--regime", choices=["finite", "snh-bulk", "snh-depletion", "wnh-bulk"], default="finite")
        sp.add_argument("--z", type=_pair, action="append", default=[], metavar="X,Y")
        sp.add_argument("--w", type=_pair, action="append", default=[], metavar="A,B",
                        help="regime coordinates: (wx,wy), (delta,xi) or (X,y)")
        sp.add_argument("--grid", type=_grid, default=None, metavar="x0:x1:nx,y0:y1:ny")

    sp = sub.add_parser("mc", help="Monte Carlo conditional overlaps")
    common(sp)
    mc_flags(sp)
    sp.add_argument("--regime", choices=["finite", "snh-bulk", "snh-depletion", "wnh-bulk"], default="finite")
    sp.add_argument("--z", type=_pair, action="append", default=[], metavar="X,Y")
    sp.add_argument("--w", type=_pair, action="append", default=[], metavar="A,B")
    sp.add_argument("--grid", type=_grid, default=None)

    sp = sub.add_parser("compare", help="run acceptance or cross-check suites")
    sp.add_argument("--suite", choices=["acceptance", "tau-zero", "dual-path", "regimes"], default="acceptance")
    sp.add_argument("--id", action="append", default=None, help="criterion id (repeatable)")
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--out", type=str, default=None)

    sp = sub.add_parser("figure", help="theory and MC data for one figure")
    common(sp)
    mc_flags(sp)
    sp.add_argument("--id", type=int, choices=range(1, 7), required=True)
    return p


# --- helpers ------------------------------------------------------------------------------


def _spec(args, tau: float | None = None) -> EnsembleSpec:
    if tau is None:
        if args.alpha is not None:
            tau = wnh_tau(args.n, args.alpha)
        elif args.tau is not None:
            tau = _single_tau(args)
        else:
            raise DomainError("set --tau (or --alpha for the WNH scaling)")
    return EnsembleSpec(Kind.parse(args.ensemble), args.n, tau)


def _single_tau(args) -> float | None:
    if args.tau is None:
        return None
    if len(args.tau) != 1:
        raise DomainError(f"expected one --tau value, got {args.tau}")
    return args.tau[0]


def _regime_points(args) -> list[tuple[float, float]]:
    pts = list(args.w) + list(args.z)
    if args.grid is not None:
        xs, ys = args.grid
        pts += [(float(a), float(b)) for a in xs for b in ys]
    if not pts:
        raise DomainError("give at least one point with --z, --w or --grid")
    return pts


def _to_z(regime: str, n: int, a: float, b: float) -> ComplexPoint:
    if regime == "snh-bulk":
        return snh_point(n, a, b)
    if regime == "snh-depletion":
        return depletion_point(n, a, b)
    if regime == "wnh-bulk":
        return wnh_point(n, a, b)
    return ComplexPoint(a, b)


# flags that change where or how fast output is produced but never its content
_LOCATION_FLAGS = ("--threads", "--out")


def _strip_location(argv: list[str]) -> list[str]:
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a in _LOCATION_FLAGS:
            skip = True
        elif not a.startswith(tuple(f + "=" for f in _LOCATION_FLAGS)):
            out.append(a)
    return out


def _meta(args, argv) -> dict:
    # worker count and output path are left out so reruns give byte-identical files
    d = {k: v for k, v in vars(args).items() if k not in ("grid", "threads", "out", "n_set")}
    return {"command": args.command, "argv": shlex.join(["overlaps", *_strip_location(argv)]), "flags": d}


def _emit(args, rows, meta, columns):
    text = tio.render(rows, meta, args.format, columns)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# --- commands ----------------------------------------------------------------------------


def cmd_eval(args, argv) -> int:
    meta = _meta(args, argv)
    pts = _regime_points(args)
    if args.regime == "finite":
        spec = _spec(args)
        rows = []
        for a, b in pts:
            r = fn.evaluate(spec, ComplexPoint(a, b))
            rows.append({"x": a, "y": b, "density": r.density, "overlap": r.overlap,
                         "conditional": r.conditional, "flag": r.flag})
        meta.update({"ensemble": spec.kind.value, "n": spec.n, "tau": spec.tau})
        _emit(args, rows, meta, ["x", "y", "density", "overlap", "conditional", "flag"])
        return EXIT_OK
    kind = Kind.parse(args.ensemble)
    if args.regime == "snh-depletion":
        kind = Kind.REAL
    rows = []
    for a, b in pts:
        q = asy.RegimeQuery(args.regime, (a, b), tau=_single_tau(args), alpha=args.alpha, kind=kind)
        rows.append({"a": a, "b": b, "overlap": q.overlap(), "density": q.density(), "conditional": q.conditional()})
    coords = {"snh-bulk": "(wx, wy)", "snh-depletion": "(delta, xi)", "wnh-bulk": "(X, y)"}[args.regime]
    scaling = "overlap/N, conditional/N" if args.regime.startswith("snh") else "overlap and density times pi^2/N"
    meta.update({"regime": args.regime, "ensemble": kind.value, "coordinates": coords, "scaling": scaling})
    _emit(args, rows, meta, ["a", "b", "overlap", "density", "conditional"])
    return EXIT_OK


def cmd_mc(args, argv) -> int:
    from .spectra import MCConfig, conditional_overlap_estimate

    spec = _spec(args)
    pts = [_to_z(args.regime, spec.n, a, b) for a, b in _regime_points(args)]
    hx, hy = args.h if args.h else asy.regime_window(args.regime, spec.n)
    budget = args.budget if args.budget is not None else (1_000_000 if spec.n <= 20 else 10_000)
    cfg = MCConfig(budget=budget, seed=args.seed, streams=args.streams, threads=args.threads,
                   mode=args.window, hx=hx, hy=hy, k=args.k)
    res = conditional_overlap_estimate(spec, pts, cfg)
    rows = []
    for e in res.estimates:
        th = fn.conditional_mean(spec, e.target)
        thw = fn.window_conditional(spec, e.target, hx, hy) if args.window == "box" else th
        rows.append({"x": e.target.x, "y": e.target.y, "mc_mean": e.mean, "mc_se": e.std_error, "count": e.count,
                     "flag": e.flag, "theory": th, "theory_window": thw})
    meta = _meta(args, argv)
    meta.update({"ensemble": spec.kind.value, "n": spec.n, "tau": spec.tau, "budget": budget,
                 "samples": res.samples, "discarded": res.discarded})
    meta.update(res.meta)
    _emit(args, rows, meta, ["x", "y", "mc_mean", "mc_se", "count", "flag", "theory", "theory_window"])
    return EXIT_OK


def cmd_compare(args, argv) -> int:
    from .suites import run_suite

    results = run_suite(args.suite, args.id, threads=args.threads)
    report = {
        "version": __version__,
        "suite": args.suite,
        "argv": shlex.join(["overlaps", *_strip_location(argv)]),
        "passed": all(r.passed for r in results),
        "criteria": [r.as_dict() for r in results],
    }
    for r in results:
        print(r.line(), file=sys.stderr)
    text = json.dumps(report, indent=2, default=lambda o: None if isinstance(o, float) and math.isnan(o) else str(o))
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_figure(args, argv) -> int:
    from .figures import FIGURES, MCOptions

    opts = MCOptions(budget=args.budget, seed=args.seed, streams=args.streams, threads=args.threads,
                     window=args.window, k=args.k)
    kw = {}
    if args.tau is not None:
        if args.id in (4, 5):
            kw["taus"] = tuple(args.tau)
        elif args.id in (1, 3):
            kw["tau"] = _single_tau(args)
        else:
            raise DomainError(f"figure {args.id} is parametrized by alpha, not tau")
    if args.n_set:
        kw["n"] = args.n
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    tables = FIGURES[args.id](opts, **kw)
    for name, t in tables.items():
        meta = _meta(args, argv)
        meta.update(t.meta)
        stem = name.rsplit(".", 1)[0]
        tio.write(out_dir / f"{stem}.{args.format}", t.rows, meta, args.format, t.columns)
        print(out_dir / f"{stem}.{args.format}")
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "scan": cmd_eval, "mc": cmd_mc, "compare": cmd_compare, "figure": cmd_figure}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.n_set = any(a == "--n" or a.startswith("--n=") for a in argv)
    try:
        return COMMANDS[args.command](args, argv)
    except DomainError as e:
        print(f"domain error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalFailure as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        # reader closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
