"""Data behind each figure: theory curves next to Monte Carlo estimates.

Every function returns ``{filename: Table}``.  Budgets default to desk scale
(about 1e6 matrices at N=10 and 1e3-1e4 at N=500); the published figures
used 1e8-1e9 samples.  MC windows are ``+-1/sqrt(N)`` boxes in each regime's
scaled coordinates unless stated otherwise, and the ``theory_window``
columns give the exact box average ``int O / int rho`` that such an estimate
targets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics as asy
from . import finite_n as fn
from .ensembles import ComplexPoint, EnsembleSpec, Kind, depletion_point, snh_point, wnh_point, wnh_tau
from .spectra import MCConfig, WindowMode, conditional_overlap_estimate, density_histogram

FIG3_N, FIG3_TAU = 10, 0.5
FIG3_H = 0.05
LARGE_N = 500


@dataclass
class Table:
    rows: list[dict]
    columns: list[str]
    meta: dict = field(default_factory=dict)


@dataclass
class MCOptions:
    budget: int | None = None
    seed: int = 0
    streams: int = 8
    threads: int | None = None
    window: str = "box"
    k: int = 1000
    method: str = "auto"


def _budget(opts: MCOptions, default: int) -> int:
    return int(opts.budget) if opts.budget is not None else default


def _mc(spec: EnsembleSpec, targets: list[ComplexPoint], opts: MCOptions, budget: int, hx: float, hy: float):
    """MC estimates keyed by target, plus run metadata; empty when budget is 0."""
    if budget <= 0 or not targets:
        return {}, {}
    uniq = list(dict.fromkeys(targets))
    cfg = MCConfig(budget=budget, seed=opts.seed, streams=opts.streams, threads=opts.threads,
                   mode=WindowMode(opts.window), hx=hx, hy=hy, k=opts.k, method=opts.method)
    res = conditional_overlap_estimate(spec, uniq, cfg)
    meta = dict(res.meta)
    meta.update({"samples": res.samples, "discarded": res.discarded})
    return {e.target: e for e in res.estimates}, meta


def _mc_cols(est) -> dict:
    if est is None:
        return {"mc_mean": math.nan, "mc_se": math.nan, "count": 0}
    return {"mc_mean": est.mean, "mc_se": est.std_error, "count": est.count}


def _window(opts: MCOptions, hx: float, hy: float):
    return (hx, hy) if opts.window == "box" else None


# --- figure 1: density heatmaps ---------------------------------------------------------


def fig1(opts: MCOptions, n: int = 125, tau: float = 0.25, alpha: float = 1.0, grid: int = 41) -> dict:
    out = {}
    budget = _budget(opts, 200)
    for regime, t in (("snh", tau), ("wnh", wnh_tau(n, alpha))):
        for kind in (Kind.REAL, Kind.COMPLEX):
            spec = EnsembleSpec(kind, n, t)
            ax = math.sqrt(n) * (1 + t) * 1.05
            ay = math.sqrt(n) * (1 - t) * 1.05 if regime == "snh" else 4.0 * math.pi / math.sqrt(n)
            xe = np.linspace(-ax, ax, grid + 1)
            ye = np.linspace(-ay, ay, grid + 1)
            hist = density_histogram(spec, xe, ye, budget, seed=opts.seed, streams=opts.streams,
                                     threads=opts.threads) if budget > 0 else None
            rows = []
            for i in range(grid):
                for j in range(grid):
                    x = 0.5 * (xe[i] + xe[i + 1])
                    y = 0.5 * (ye[j] + ye[j + 1])
                    if kind is Kind.REAL and y == 0.0:
                        th = math.nan
                    else:
                        th = fn.density(spec, ComplexPoint(x, y))
                    r = {"x": x, "y": y, "theory": th}
                    if hist is not None:
                        r.update({"mc_density": float(hist.density()[i, j]),
                                  "mc_se": float(hist.std_error()[i, j]), "count": int(hist.counts[i, j])})
                    else:
                        r.update({"mc_density": math.nan, "mc_se": math.nan, "count": 0})
                    rows.append(r)
            meta = {"figure": 1, "ensemble": kind.value, "n": n, "tau": t, "budget": budget,
                    "window_shape": "histogram bins"}
            out[f"fig1_{kind.value}_{regime}.csv"] = Table(rows, ["x", "y", "theory", "mc_density", "mc_se", "count"], meta)
    return out


# --- figure 2: WNH conditional densities ------------------------------------------------


def fig2(opts: MCOptions, n: int = LARGE_N, bins: int = 32) -> dict:
    out = {}
    budget = _budget(opts, 1000)
    r = math.sqrt(n)
    panels = (
        ("left", 2.0, "X", 0.0, np.linspace(-4.0, 4.0, bins + 1)),
        ("right", 1.0, "y", 1.0, np.linspace(-2.0, 2.0, bins + 1)),
    )
    for side, alpha, fixed, value, edges in panels:
        free = "y" if fixed == "X" else "X"
        rows = []
        meta = {"figure": 2, "panel": side, "n": n, "alpha": alpha, "fixed": fixed, "fixed_value": value,
                "budget": budget, "window_shape": "strip +-1/sqrt(N) in scaled coordinates"}
        for kind in (Kind.REAL, Kind.COMPLEX):
            spec = EnsembleSpec(kind, n, wnh_tau(n, alpha))
            norm = asy.wnh_normalizer(kind, alpha, fixed, value)
            counts = np.zeros(bins)
            if budget > 0:
                if fixed == "X":
                    xe = np.array([r * value - 1.0, r * value + 1.0])
                    ye = edges * math.pi / r
                    h = density_histogram(spec, xe, ye, budget, seed=opts.seed, streams=opts.streams,
                                          threads=opts.threads)
                    counts = h.counts[0].astype(float)
                else:
                    xe = edges * r
                    yc = math.pi * value / r
                    ye = np.array([yc - math.pi / n, yc + math.pi / n])
                    h = density_histogram(spec, xe, ye, budget, seed=opts.seed, streams=opts.streams,
                                          threads=opts.threads)
                    counts = h.counts[:, 0].astype(float)
            total = counts.sum()
            width = np.diff(edges)
            for b in range(bins):
                c = 0.5 * (edges[b] + edges[b + 1])
                th = asy.wnh_conditional_density(kind, alpha, fixed, value, c, norm=norm)
                mc = counts[b] / total / width[b] if total > 0 else math.nan
                se = math.sqrt(counts[b]) / total / width[b] if total > 0 else math.nan
                rows.append({"ensemble": kind.value, free: c, "theory": th, "mc_mean": mc, "mc_se": se,
                             "count": int(counts[b])})
        out[f"fig2_{side}.csv"] = Table(rows, ["ensemble", free, "theory", "mc_mean", "mc_se", "count"], meta)
    return out


# --- figure 3: finite N = 10 ---------------------------------------------------------


FIG3_Y = (0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6)
FIG3_X = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5)


def fig3(opts: MCOptions, n: int = FIG3_N, tau: float = FIG3_TAU, ys=FIG3_Y, xs=FIG3_X,
         h: float = FIG3_H, ensembles=(Kind.REAL, Kind.COMPLEX)) -> dict:
    budget = _budget(opts, 1_000_000)
    y_right = 0.5 * math.sqrt(n) * (1.0 - tau)
    left_pts = [ComplexPoint(0.0, y) for y in ys]
    right_pts = [ComplexPoint(x, y_right) for x in xs]
    left, right = [], []
    runs = {}
    for kind in map(Kind, ensembles):
        spec = EnsembleSpec(kind, n, tau)
        est, meta = _mc(spec, left_pts + right_pts, opts, budget, h, h)
        runs[kind.value] = meta
        for pts, rows, coord in ((left_pts, left, "y"), (right_pts, right, "x")):
            for p in pts:
                th = fn.conditional_mean(spec, p)
                thw = fn.window_conditional(spec, p, h, h) if opts.window == "box" else th
                row = {"ensemble": kind.value, coord: getattr(p, coord), "theory": th, "theory_window": thw}
                row.update(_mc_cols(est.get(p)))
                rows.append(row)
    base = {"figure": 3, "n": n, "tau": tau, "budget": budget, "window": _window(opts, h, h), "mc": runs}
    cols = ["ensemble", "{}", "theory", "theory_window", "mc_mean", "mc_se", "count"]
    return {
        "fig3_left.csv": Table(left, [c.format("y") for c in cols], dict(base, panel="left", x=0.0)),
        "fig3_right.csv": Table(right, [c.format("x") for c in cols], dict(base, panel="right", y=y_right)),
    }


# --- figure 4: SNH bulk --------------------------------------------------------------


def fig4(opts: MCOptions, n: int = LARGE_N, taus=(0.25, 0.75), y_fracs=(0.1, 0.3, 0.5, 0.7, 0.9),
         x_fracs=(0.0, 0.3, 0.6, 0.8)) -> dict:
    """Bulk slices at x = 0 and y = 0.5(1-tau), points given as fractions of the semi-axes."""
    budget = _budget(opts, 10_000)
    hx, hy = asy.regime_window("snh-bulk", n)
    left, right, runs = [], [], {}
    for tau in taus:
        wy_right = 0.5 * (1.0 - tau)
        lp = [(0.0, f * (1.0 - tau)) for f in y_fracs]
        rp = [(f * (1.0 + tau), wy_right) for f in x_fracs]
        for kind in (Kind.REAL, Kind.COMPLEX):
            spec = EnsembleSpec(kind, n, tau)
            # eginoe boxes that reach the real axis have no complex-eigenvalue average; left as NaN
            ok = lambda p: kind is Kind.COMPLEX or abs(p.y) > hy
            pts = [p for p in (snh_point(n, *w) for w in lp + rp) if ok(p)]
            est, meta = _mc(spec, pts, opts, budget, hx, hy)
            runs[f"{kind.value}@{tau}"] = meta
            for ws, rows in ((lp, left), (rp, right)):
                for w in ws:
                    p = snh_point(n, *w)
                    row = {"ensemble": kind.value, "tau": tau, "wx": w[0], "wy": w[1],
                           "theory": asy.snh_bulk_conditional(tau, *w),
                           "finite_n": fn.conditional_mean(spec, p) / n,
                           "theory_window": fn.window_conditional(spec, p, hx, hy) / n if ok(p) else math.nan}
                    c = _mc_cols(est.get(p))
                    c["mc_mean"] /= n
                    c["mc_se"] /= n
                    row.update(c)
                    rows.append(row)
    cols = ["ensemble", "tau", "wx", "wy", "theory", "finite_n", "theory_window", "mc_mean", "mc_se", "count"]
    base = {"figure": 4, "n": n, "budget": budget, "scaling": "conditional / N", "window": [hx, hy], "mc": runs}
    return {"fig4_left.csv": Table(left, cols, dict(base, panel="left")),
            "fig4_right.csv": Table(right, cols, dict(base, panel="right"))}


# --- figure 5: SNH depletion (real ensemble) --------------------------------------------


FIG5_XI = (0.25, 0.5, 1.0, 2.0)
FIG5_DELTA = (0.0, 0.5, 1.0)


def fig5(opts: MCOptions, n: int = LARGE_N, taus=(0.25, 0.5, 0.75), xis=FIG5_XI, deltas=FIG5_DELTA,
         xi_right: float = 0.5) -> dict:
    budget = _budget(opts, 10_000)
    hx, hy = asy.regime_window("snh-depletion", n)
    left, right, runs = [], [], {}
    for tau in taus:
        spec = EnsembleSpec(Kind.REAL, n, tau)
        lp = [(0.0, xi) for xi in xis]
        rp = [(d, xi_right) for d in deltas]
        est, meta = _mc(spec, [depletion_point(n, *q) for q in lp + rp], opts, budget, hx, hy)
        runs[str(tau)] = meta
        for qs, rows in ((lp, left), (rp, right)):
            for d, xi in qs:
                p = depletion_point(n, d, xi)
                row = {"tau": tau, "delta": d, "xi": xi,
                       "theory": n * asy.snh_depletion_conditional(tau, d, xi),
                       "theory_window": asy.depletion_window_conditional(tau, n, p.z, hx, hy),
                       "finite_n": fn.conditional_mean(spec, p),
                       "finite_n_window": fn.window_conditional(spec, p, hx, hy)}
                row.update(_mc_cols(est.get(p)))
                rows.append(row)
    cols = ["tau", "delta", "xi", "theory", "theory_window", "finite_n", "finite_n_window", "mc_mean", "mc_se", "count"]
    base = {"figure": 5, "n": n, "budget": budget, "window": [hx, hy], "mc": runs, "ensemble": "eginoe"}
    return {"fig5_left.csv": Table(left, cols, dict(base, panel="left")),
            "fig5_right.csv": Table(right, cols, dict(base, panel="right"))}


# --- figure 6: WNH bulk ------------------------------------------------------------------


FIG6_Y = (0.5, 1.0, 1.5, 2.0, 3.0)
FIG6_X = (0.0, 0.5, 1.0, 1.5)


def fig6(opts: MCOptions, n: int = LARGE_N, left_y=FIG6_Y, right_x=FIG6_X,
         left_ensembles=(Kind.REAL, Kind.COMPLEX), right_ensembles=(Kind.REAL, Kind.COMPLEX),
         alpha_left: float = 2.0, alpha_right: float = 1.0, y_right: float = 1.0) -> dict:
    budget = _budget(opts, 10_000)
    hx, hy = asy.regime_window("wnh-bulk", n)
    out, runs = {}, {}
    panels = (("left", alpha_left, [(0.0, y) for y in left_y], left_ensembles),
              ("right", alpha_right, [(X, y_right) for X in right_x], right_ensembles))
    cols = ["ensemble", "alpha", "X", "y", "theory", "theory_window", "finite_n", "finite_n_window",
            "mc_mean", "mc_se", "count"]
    for side, alpha, qs, kinds in panels:
        rows = []
        for kind in map(Kind, kinds):
            spec = EnsembleSpec(kind, n, wnh_tau(n, alpha))
            est, meta = _mc(spec, [wnh_point(n, *q) for q in qs], opts, budget, hx, hy)
            runs[f"{side}:{kind.value}"] = meta
            for X, y in qs:
                p = wnh_point(n, X, y)
                row = {"ensemble": kind.value, "alpha": alpha, "X": X, "y": y,
                       "theory": asy.wnh_conditional(kind, alpha, X, y),
                       "theory_window": asy.wnh_window_conditional(kind, alpha, n, p.z, hx, hy),
                       "finite_n": fn.conditional_mean(spec, p),
                       "finite_n_window": fn.window_conditional(spec, p, hx, hy)}
                row.update(_mc_cols(est.get(p)))
                rows.append(row)
        meta = {"figure": 6, "panel": side, "n": n, "alpha": alpha, "budget": budget, "window": [hx, hy],
                "mc": runs}
        out[f"fig6_{side}.csv"] = Table(rows, cols, meta)
    return out


FIGURES = {1: fig1, 2: fig2, 3: fig3, 4: fig4, 5: fig5, 6: fig6}
