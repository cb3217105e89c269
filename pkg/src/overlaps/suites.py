"""Acceptance criteria and comparison suites.

Each criterion returns a :class:`CriterionResult` holding the individual
checks with their measured deviations.  Monte Carlo budgets can be scaled
down for development with ``OVERLAPS_BUDGET_SCALE`` (a float); reported
results use the full budgets.
"""
from __future__ import annotations

import math
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import asymptotics as asy
from . import finite_n as fn
from .ensembles import ComplexPoint, EnsembleSpec, Kind, depletion_point, snh_point, wnh_point, wnh_tau
from .figures import MCOptions, fig3, fig5, fig6
from .sampling import SeededStream, sample_batch
from .spectra import decompose, biorthogonality_error

SEED = 20240611


@dataclass
class Check:
    name: str
    passed: bool
    value: float | None = None
    reference: float | None = None
    deviation: float | None = None
    tolerance: float | None = None


@dataclass
class CriterionResult:
    id: str
    title: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0
    notes: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def worst(self) -> Check | None:
        scored = [c for c in self.checks if c.deviation is not None and c.tolerance]
        if not scored:
            return None
        return max(scored, key=lambda c: c.deviation / c.tolerance)

    def line(self) -> str:
        w = self.worst()
        tail = f"; worst {w.name}: {w.deviation:.3g} (tol {w.tolerance:.3g})" if w else ""
        failed = sum(not c.passed for c in self.checks)
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.id}: {self.title} ({len(self.checks)} checks, {failed} failed{tail}) [{self.seconds:.1f}s]"

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def budget_scale() -> float:
    return float(os.environ.get("OVERLAPS_BUDGET_SCALE", "1") or 1)


def _scaled(b: int) -> int:
    return max(1, int(round(b * budget_scale())))


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def _rel_check(name, value, ref, tol) -> Check:
    d = _rel(value, ref)
    return Check(name, bool(d <= tol), value, ref, d, tol)


def _abs_check(name, value, ref, tol) -> Check:
    d = abs(value - ref)
    return Check(name, bool(d <= tol), value, ref, d, tol)


def _z_check(name, mean, se, ref, k=3.0) -> Check:
    if not (math.isfinite(mean) and math.isfinite(se) and se > 0):
        return Check(name, False, mean, ref, None, k)
    z = abs(mean - ref) / se
    return Check(name, bool(z <= k), mean, ref, z, k)


def _timed(fn_):
    def wrapper(*a, **kw):
        t0 = time.perf_counter()
        r = fn_(*a, **kw)
        r.seconds = time.perf_counter() - t0
        return r

    wrapper.__name__ = fn_.__name__
    wrapper.__doc__ = fn_.__doc__
    return wrapper


# --- criteria -------------------------------------------------------------------------


@_timed
def criterion_1() -> CriterionResult:
    r = CriterionResult("1", "SNH bulk constants")
    for tau in (0.0, 0.25, 0.75):
        r.checks.append(_abs_check(f"overlap(tau={tau}, w=0)", asy.snh_bulk_overlap(tau, 0, 0), 1 / math.pi, 1e-12))
    r.checks.append(_abs_check("density(0.25, w=0)", asy.snh_bulk_density(0.25, 0, 0), 1 / (0.9375 * math.pi), 1e-12))
    return r


def ginue_partial_sum(n: int, z: complex) -> float:
    a = abs(z) ** 2
    return math.exp(-a) / math.pi * sum(a**k / math.factorial(k) for k in range(n))


@_timed
def criterion_2() -> CriterionResult:
    r = CriterionResult("2", "tau -> 0 corner against the GinUE partial sum")
    grid = np.linspace(-2.0, 2.0, 5)
    for n in (2, 5, 10):
        spec = EnsembleSpec(Kind.COMPLEX, n, 1e-10)
        for x in grid:
            for y in grid:
                z = complex(x, y)
                r.checks.append(_rel_check(f"N={n} z={z}", fn.density_eginue(spec, z), ginue_partial_sum(n, z), 1e-6))
    return r


DUAL_POINTS = (0.3 + 0.1j, 1.0 + 0.5j, -2.0 + 1.5j, 0.5 - 0.8j, 3.0 + 2.0j, 0.0 + 0.1j, 5.0 + 0.3j)


@_timed
def criterion_3() -> CriterionResult:
    r = CriterionResult("3", "P_n, T_n double sums against difference forms")
    for tau in (0.1, 0.5, 0.9):
        for z in DUAL_POINTS:
            for n in range(0, 61):
                p = fn.p_n(n, z, tau)
                r.checks.append(_rel_check(f"P n={n} tau={tau} z={z}", p, fn.p_n_difference(n, z, tau), 1e-8))
                if n > 0:
                    t = fn.t_n(n, z, tau)
                    r.checks.append(_rel_check(f"T n={n} tau={tau} z={z}", t, fn.t_n_difference(n, z, tau), 1e-8))
    return r


ORACLE_POINTS = (
    ("density", 5, 0.3, 0.5 + 0.5j),
    ("density", 12, 0.5, 1.0 + 0.8j),
    ("density", 8, 0.7, -0.5 + 0.3j),
    ("P", 6, 0.5, 1.0 + 0.8j),
    ("P", 12, 0.3, 0.2 + 1.1j),
    ("P", 3, 0.8, -1.0 + 0.4j),
)


@_timed
def criterion_4() -> CriterionResult:
    r = CriterionResult("4", "integral representations against finite-N sums")
    for kind, n, tau, z in ORACLE_POINTS:
        o = asy.integral_rep_oracle(kind, n, z, tau)
        ref = fn.rho_eginue(n, z, tau) if kind == "density" else fn.p_n(n, z, tau)
        c = _rel_check(f"{kind} N={n} tau={tau} z={z}", o.value, ref, 1e-4)
        c.passed = c.passed and o.converged
        r.checks.append(c)
    return r


def _mc_rows_checks(r: CriterionResult, rows, label, refs=("theory_window",)):
    for row in rows:
        coord = {k: row[k] for k in ("x", "y", "X", "delta", "xi") if k in row}
        for ref in refs:
            r.checks.append(_z_check(f"{label} {row.get('ensemble', '')} {coord} vs {ref}",
                                     row["mc_mean"], row["mc_se"], row[ref]))


@_timed
def criterion_5(threads: int | None = None) -> CriterionResult:
    budget = _scaled(1_000_000)
    r = CriterionResult("5", "finite-N conditional overlap at N=10, tau=0.5 against MC",
                        notes=f"{budget} matrices per ensemble; box half-width {0.05}; reference is the box average")
    out = fig3(MCOptions(budget=budget, seed=SEED, streams=8, threads=threads))
    for name, table in out.items():
        _mc_rows_checks(r, table.rows, name)
    return r


BULK_FRACS = ((0.0, 0.4), (0.0, 0.5), (0.0, 0.6), (0.0, 0.8), (0.3, 0.5), (0.5, 0.5), (0.7, 0.5), (0.6, 0.3))
DEPLETION_POINTS = ((0.0, 0.25), (0.0, 0.5), (0.0, 1.0), (0.0, 2.0), (0.5, 0.5), (1.0, 0.5))


def bulk_points(tau: float):
    # interior points as (x, y) fractions of the semi-axes; y fractions keep clear of the depletion strip
    return [(fx * (1 + tau), fy * (1 - tau)) for fx, fy in BULK_FRACS]


@_timed
def criterion_6(threads: int | None = None) -> CriterionResult:
    n, tau = 500, 0.25
    budget = _scaled(10_000)
    r = CriterionResult("6", "SNH bulk and depletion at N=500, tau=0.25",
                        notes=f"bulk: finite N vs limit, 2%; depletion: {budget} MC matrices, window +-1/sqrt(N) in (delta, xi)")
    for kind in (Kind.COMPLEX, Kind.REAL):
        spec = EnsembleSpec(kind, n, tau)
        for w in bulk_points(tau):
            e = fn.conditional_mean(spec, snh_point(n, *w)) / n
            r.checks.append(_rel_check(f"bulk {kind.value} w={w}", e, asy.snh_bulk_conditional(tau, *w), 0.02))
    out = fig5(MCOptions(budget=budget, seed=SEED, streams=8, threads=threads), n=n, taus=(tau,),
               xis=tuple(x for d, x in DEPLETION_POINTS if d == 0.0),
               deltas=tuple(d for d, x in DEPLETION_POINTS if d != 0.0))
    for name, table in out.items():
        _mc_rows_checks(r, table.rows, name)
    return r


WNH_POINTS = ((0.0, 0.5), (0.0, 1.0), (0.0, 2.0), (0.5, 1.0), (1.0, 1.0), (-1.0, 2.0), (0.5, 2.0), (1.0, 0.5))


@_timed
def criterion_7(threads: int | None = None) -> CriterionResult:
    n = 500
    budget = _scaled(10_000)
    r = CriterionResult("7", "WNH bulk at N=500",
                        notes=f"finite N vs limit, 3%; {budget} MC matrices, window +-1/sqrt(N) in (X, y)")
    for alpha in (1.0, 2.0):
        for kind in (Kind.COMPLEX, Kind.REAL):
            spec = EnsembleSpec(kind, n, wnh_tau(n, alpha))
            lim = asy.wnh_bulk_overlap_eginoe if kind is Kind.REAL else asy.wnh_bulk_overlap_eginue
            for X, y in WNH_POINTS:
                o = math.pi**2 / n * fn.overlap(spec, wnh_point(n, X, y))
                r.checks.append(_rel_check(f"{kind.value} alpha={alpha} (X,y)=({X},{y})", o, lim(alpha, X, y), 0.03))
    out = fig6(MCOptions(budget=budget, seed=SEED, streams=8, threads=threads), n=n,
               left_y=(0.5, 1.0), right_x=(0.0, 1.0),
               left_ensembles=(Kind.REAL,), right_ensembles=(Kind.COMPLEX,))
    for name, table in out.items():
        _mc_rows_checks(r, table.rows, name, refs=("theory_window", "finite_n_window"))
    return r


def _triangular_overlap() -> tuple[float, float]:
    s = decompose(np.array([[0.0, 2.0], [0.0, 1.0]]))
    return float(s.overlaps[0]), 1.0 + 4.0 / 1.0


@_timed
def criterion_8() -> CriterionResult:
    r = CriterionResult("8", "eigenvector engine")
    got, ref = _triangular_overlap()
    r.checks.append(_abs_check("2x2 triangular O_11", got, ref, 1e-12))
    n, count = 50, _scaled(10_000)
    for kind in (Kind.REAL, Kind.COMPLEX):
        spec = EnsembleSpec(kind, n, 0.5)
        rng = SeededStream(SEED, 8 if kind is Kind.REAL else 9).generator()
        worst_bi = worst_min = worst_pair = 0.0
        min_ov = math.inf
        done = 0
        while done < count:
            xs = sample_batch(spec, rng, min(200, count - done))
            for x in xs:
                s = decompose(x)
                worst_bi = max(worst_bi, biorthogonality_error(s))
                min_ov = min(min_ov, float(s.overlaps.min()))
                if kind is Kind.REAL:
                    worst_pair = max(worst_pair, conjugate_pair_mismatch(s))
            done += len(xs)
        r.checks.append(_abs_check(f"{kind.value} biorthogonality, {count} samples", worst_bi, 0.0, 1e-8))
        c = Check(f"{kind.value} min O_nn >= 1 - 1e-8, {count} samples", bool(min_ov >= 1 - 1e-8), min_ov, 1.0,
                  max(0.0, 1.0 - min_ov), 1e-8)
        r.checks.append(c)
        if kind is Kind.REAL:
            r.checks.append(_abs_check(f"conjugate pair overlap equality, {count} samples", worst_pair, 0.0, 1e-8))
    return r


def conjugate_pair_mismatch(s) -> float:
    """Largest relative overlap difference between conjugate eigenvalue partners."""
    w, ov = s.eigenvalues, s.overlaps
    worst = 0.0
    for i in np.nonzero(w.imag > 0)[0]:
        j = int(np.argmin(np.abs(w - np.conj(w[i]))))
        worst = max(worst, abs(ov[i] - ov[j]) / ov[i])
    return worst


@_timed
def criterion_9() -> CriterionResult:
    r = CriterionResult("9", "sampling moments at N=4")
    n, count = 4, _scaled(1_000_000)
    iu = np.triu_indices(n, 1)
    for kind in (Kind.REAL, Kind.COMPLEX):
        for tau in (0.0, 0.5, 0.9):
            spec = EnsembleSpec(kind, n, tau)
            rng = SeededStream(SEED, 100 + int(10 * tau) + (50 if kind is Kind.REAL else 0)).generator()
            stats = {"xy": [], "abs2": [], "diag": []}
            done = 0
            while done < count:
                b = min(100_000, count - done)
                x = sample_batch(spec, rng, b)
                up, lo = x[:, iu[0], iu[1]], x[:, iu[1], iu[0]]
                stats["xy"].append((up * lo).mean(axis=1))
                stats["abs2"].append((np.abs(up) ** 2).mean(axis=1))
                d = np.diagonal(x, axis1=1, axis2=2)
                stats["diag"].append((d * d).mean(axis=1) if kind is Kind.REAL else (np.abs(d) ** 2).mean(axis=1))
                done += b
            for key, ref in (("xy", tau), ("abs2", 1.0), ("diag", 1.0 + tau if kind is Kind.REAL else 1.0)):
                v = np.concatenate(stats[key])
                for part, vv, rr in (("re", v.real, ref), ("im", v.imag, 0.0)):
                    if part == "im" and not np.iscomplexobj(v):
                        continue
                    se = vv.std(ddof=1) / math.sqrt(vv.size)
                    label = {"xy": "E[X_ij X_ji]", "abs2": "E|X_ij|^2", "diag": "E[X_ii^2]" if kind is Kind.REAL else "E|X_ii|^2"}[key]
                    r.checks.append(_z_check(f"{kind.value} tau={tau} {label} {part}", float(vv.mean()), se, rr, 4.0))
    return r


@_timed
def criterion_10() -> CriterionResult:
    from .cli import main as cli_main
    import tempfile
    from pathlib import Path

    r = CriterionResult("10", "byte-identical output for 1 and 8 workers")
    with tempfile.TemporaryDirectory() as d:
        texts = {}
        for threads in (1, 8):
            out = Path(d) / f"mc_{threads}.csv"
            code = cli_main(["mc", "--ensemble", "eginoe", "--n", "10", "--tau", "0.5", "--z", "0,0.5", "--z", "1,0.79",
                             "--budget", str(_scaled(40_000)), "--seed", "7", "--streams", "8",
                             "--threads", str(threads), "--out", str(out)])
            texts[threads] = out.read_bytes() if code == 0 else b""
        same = texts[1] == texts[8] and len(texts[1]) > 0
        r.checks.append(Check("mc CSV identical across 1 and 8 workers", same, None, None, None, None))
    return r


# --- extra suites -------------------------------------------------------------------


@_timed
def tau_zero_suite() -> CriterionResult:
    r = criterion_2()
    r.id, r.title = "tau-zero", "GinUE/GinOE limits and tau -> 0 continuity"
    for n in (2, 5, 10):
        for kind in (Kind.COMPLEX, Kind.REAL):
            for z in (0.5 + 0.5j, 1.0 + 1.2j, -1.5 + 0.3j):
                a = fn.evaluate(EnsembleSpec(kind, n, 1e-6), z)
                b = fn.evaluate(EnsembleSpec(kind, n, 1e-10), z)
                r.checks.append(_rel_check(f"{kind.value} N={n} z={z} density", a.density, b.density, 1e-4))
                r.checks.append(_rel_check(f"{kind.value} N={n} z={z} overlap", a.overlap, b.overlap, 1e-4))
        # GinUE overlap has weights (N - k) on |z|^2k/k!
        z = 0.7 + 0.4j
        a2 = abs(z) ** 2
        ref = math.exp(-a2) / math.pi * sum((n - k) * a2**k / math.factorial(k) for k in range(n))
        r.checks.append(_rel_check(f"GinUE overlap N={n}", fn.overlap(EnsembleSpec(Kind.COMPLEX, n, 0.0), z), ref, 1e-12))
    return r


@_timed
def dual_path_suite() -> CriterionResult:
    r = criterion_3()
    r.id, r.title = "dual-path", "P/T difference forms and integral representations"
    r.checks.extend(criterion_4().checks)
    for kind, n, tau, z in (("R", 6, 0.5, 1.0 + 0.8j), ("T", 7, 0.4, 0.5 + 0.5j)):
        o = asy.integral_rep_oracle(kind, n, z, tau)
        ref = fn.r_n(n, z, tau) if kind == "R" else fn.t_n(n, z, tau)
        r.checks.append(_rel_check(f"{kind} oracle N={n}", o.value, ref, 1e-4))
    return r


@_timed
def regimes_suite() -> CriterionResult:
    r = CriterionResult("regimes", "finite N against SNH and WNH limits at N=500")
    n, tau = 500, 0.25
    for kind in (Kind.COMPLEX, Kind.REAL):
        spec = EnsembleSpec(kind, n, tau)
        for w in bulk_points(tau):
            e = fn.conditional_mean(spec, snh_point(n, *w)) / n
            r.checks.append(_rel_check(f"bulk {kind.value} w={w}", e, asy.snh_bulk_conditional(tau, *w), 0.02))
    spec = EnsembleSpec(Kind.REAL, n, tau)
    for d, xi in DEPLETION_POINTS:
        e = fn.conditional_mean(spec, depletion_point(n, d, xi))
        r.checks.append(_rel_check(f"depletion (delta,xi)=({d},{xi})", e, n * asy.snh_depletion_conditional(tau, d, xi), 0.03))
    for alpha in (1.0, 2.0):
        for kind in (Kind.COMPLEX, Kind.REAL):
            spec = EnsembleSpec(kind, n, wnh_tau(n, alpha))
            lim = asy.wnh_bulk_overlap_eginoe if kind is Kind.REAL else asy.wnh_bulk_overlap_eginue
            for X, y in WNH_POINTS:
                o = math.pi**2 / n * fn.overlap(spec, wnh_point(n, X, y))
                r.checks.append(_rel_check(f"wnh {kind.value} alpha={alpha} ({X},{y})", o, lim(alpha, X, y), 0.03))
    return r


CRITERIA = {
    "1": criterion_1, "2": criterion_2, "3": criterion_3, "4": criterion_4, "5": criterion_5,
    "6": criterion_6, "7": criterion_7, "8": criterion_8, "9": criterion_9, "10": criterion_10,
}
MC_CRITERIA = {"5", "6", "7"}
SUITES = {
    "acceptance": list(CRITERIA),
    "tau-zero": [tau_zero_suite],
    "dual-path": [dual_path_suite],
    "regimes": [regimes_suite],
}


def run_suite(name: str, ids: list[str] | None = None, threads: int | None = None) -> list[CriterionResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    if name != "acceptance":
        return [f() for f in SUITES[name]]
    out = []
    for cid in ids or SUITES[name]:
        f = CRITERIA[str(cid)]
        out.append(f(threads=threads) if str(cid) in MC_CRITERIA else f())
    return out
