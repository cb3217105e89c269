"""Eigenvector overlaps of sampled matrices and conditional Monte Carlo estimators.

For ``X = S diag(lambda) S^{-1}`` the right eigenvectors are the columns of
``S`` and the left eigenvectors the rows of ``S^{-1}``; the self-overlap is
``O_nn = |row_n(S^{-1})|^2 |col_n(S)|^2``.

Estimates are reproducible: tasks are keyed by stream id, each task is
processed sequentially, and task results are merged with a pairwise tree in
stream order.  The number of worker processes therefore never changes the
output bits.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy import linalg as sla

from .ensembles import ComplexPoint, EnsembleSpec, Kind
from .sampling import GENERATOR, SeededStream, iter_samples
from .specfun import DomainError

RESIDUAL_DISCARD = 1e-6
TARGETED_MIN_N = 100
FLAG_NO_HITS = "no-hits"


# --- single matrices --------------------------------------------------------------


@dataclass
class SpectralSample:
    eigenvalues: np.ndarray
    overlaps: np.ndarray
    residual_max: float
    right: np.ndarray | None = None
    left: np.ndarray | None = None


def _sort_order(w: np.ndarray) -> np.ndarray:
    return np.lexsort((w.imag, w.real), axis=-1)


def decompose(x: np.ndarray, keep_vectors: bool = True) -> SpectralSample:
    """Eigenvalues, self-overlaps and residual of one square matrix.

    Eigenvalues are sorted by (Re, Im).  ``left`` holds the rows of ``S^{-1}``
    so that ``left @ right`` is the identity.
    """
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DomainError(f"decompose needs a square matrix, got shape {x.shape}")
    w, s = np.linalg.eig(x)
    order = _sort_order(w)
    w = w[order].astype(complex)
    s = s[:, order].astype(complex)
    s_inv = np.linalg.inv(s)
    ov = np.sum(np.abs(s_inv) ** 2, axis=1) * np.sum(np.abs(s) ** 2, axis=0)
    res = _residuals(x[None], w[None], s[None])[0]
    return SpectralSample(w, ov, float(res), s if keep_vectors else None, s_inv if keep_vectors else None)


def _residuals(xs: np.ndarray, w: np.ndarray, s: np.ndarray) -> np.ndarray:
    # max_n |X v_n - lambda_n v_n| / (|X|_F |v_n|) per matrix
    r = xs @ s - s * w[:, None, :]
    num = np.linalg.norm(r, axis=1)
    den = np.linalg.norm(s, axis=1) * np.linalg.norm(xs, axis=(1, 2))[:, None]
    return np.max(num / den, axis=1)


def decompose_batch(xs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stacked version of :func:`decompose`: eigenvalues, overlaps, residuals."""
    w, s = np.linalg.eig(xs)
    w = w.astype(complex)
    s = s.astype(complex)
    order = _sort_order(w)
    w = np.take_along_axis(w, order, axis=1)
    s = np.take_along_axis(s, order[:, None, :], axis=2)
    s_inv = np.linalg.inv(s)
    ov = np.sum(np.abs(s_inv) ** 2, axis=2) * np.sum(np.abs(s) ** 2, axis=1)
    return w, ov, _residuals(xs, w, s)


def biorthogonality_error(sample: SpectralSample) -> float:
    """``max |v_L,i^dagger v_R,j - delta_ij|`` using the stored vectors."""
    if sample.left is None or sample.right is None:
        raise DomainError("sample was decomposed without eigenvectors")
    g = sample.left @ sample.right
    return float(np.max(np.abs(g - np.eye(g.shape[0]))))


def _probe(n: int) -> np.ndarray:
    k = np.arange(n)
    b = np.exp(2j * math.pi * 0.6180339887498949 * k) * (1.0 + 0.1 * np.cos(k))
    return b / np.linalg.norm(b)


def targeted_overlaps(x: np.ndarray, lams) -> tuple[np.ndarray, np.ndarray]:
    """Self-overlaps at selected eigenvalues by shifted inverse iteration.

    For each computed eigenvalue ``lam`` of ``x`` the right and left
    eigenvectors are taken from two solves with the LU factors of
    ``x - lam I``; ``O = |u|^2 |v|^2 / |u^dagger v|^2``.  Returns the
    overlaps and the relative residuals ``|x v - lam v| / |x|_F``.
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    nx = np.linalg.norm(x)
    b = _probe(n)
    eye = np.eye(n)
    out, res = [], []
    for lam in np.atleast_1d(lams):
        lu = sla.lu_factor(x - lam * eye, check_finite=False)
        v = b
        u = b
        for _ in range(2):
            v = sla.lu_solve(lu, v, check_finite=False)
            v /= np.linalg.norm(v)
            u = sla.lu_solve(lu, u, trans=2, check_finite=False)
            u /= np.linalg.norm(u)
        out.append(1.0 / abs(np.vdot(u, v)) ** 2)
        res.append(np.linalg.norm(x @ v - lam * v) / nx)
    return np.asarray(out), np.asarray(res)


# --- accumulators ---------------------------------------------------------------------


@dataclass(frozen=True)
class Accumulator:
    """Count, mean and centred sum of squares of a set of observations."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, values) -> "Accumulator":
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            return cls()
        m = float(np.sum(v) / v.size)
        return cls(int(v.size), m, float(np.sum((v - m) ** 2)))

    def merge(self, other: "Accumulator") -> "Accumulator":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        n = self.count + other.count
        d = other.mean - self.mean
        mean = self.mean + d * other.count / n
        m2 = self.m2 + other.m2 + d * d * self.count * other.count / n
        return Accumulator(n, mean, m2)

    @property
    def std_error(self) -> float:
        if self.count < 2:
            return math.nan
        return math.sqrt(self.m2 / (self.count - 1) / self.count)


def pairwise_merge(items: list, merge):
    """Reduce ``items`` in a balanced binary tree, keeping their order."""
    if not items:
        raise ValueError("nothing to merge")
    while len(items) > 1:
        nxt = [merge(items[i], items[i + 1]) for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


# --- Monte Carlo estimation ----------------------------------------------------------


class WindowMode(str, enum.Enum):
    BOX = "box"
    KNEAREST = "knearest"


@dataclass(frozen=True)
class MCConfig:
    """Monte Carlo run settings.

    ``hx``/``hy`` are box half-widths in z units (default ``1/sqrt(N)``);
    ``method`` is "full" (eig + inverse of S), "targeted" (eigenvalues,
    then inverse iteration at hits) or "auto".
    """

    budget: int
    seed: int = 0
    streams: int = 8
    threads: int | None = None
    mode: WindowMode = WindowMode.BOX
    hx: float | None = None
    hy: float | None = None
    k: int = 1000
    method: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "mode", WindowMode(self.mode))
        if int(self.budget) != self.budget or self.budget < 1:
            raise DomainError(f"budget must be a positive integer, got {self.budget}")
        object.__setattr__(self, "budget", int(self.budget))
        if self.streams < 1:
            raise DomainError(f"streams must be >= 1, got {self.streams}")
        if self.method not in ("auto", "full", "targeted"):
            raise DomainError(f"unknown method {self.method!r}")
        if self.mode is WindowMode.KNEAREST and self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")

    def half_widths(self, n: int) -> tuple[float, float]:
        h = 1.0 / math.sqrt(n)
        return (self.hx if self.hx is not None else h, self.hy if self.hy is not None else h)

    def resolved_method(self, n: int) -> str:
        if self.method != "auto":
            return self.method
        return "targeted" if n >= TARGETED_MIN_N and self.mode is WindowMode.BOX else "full"


@dataclass(frozen=True)
class ConditionalEstimate:
    target: ComplexPoint
    mode: WindowMode
    window: tuple[float, float] | int
    mean: float
    std_error: float
    count: int
    flag: str | None = None


@dataclass
class MCResult:
    estimates: list[ConditionalEstimate]
    samples: int
    discarded: int
    meta: dict = field(default_factory=dict)


@dataclass
class _TaskResult:
    accs: list
    near: list  # per target: (keys array (m, 4), overlaps array (m,)) for k-nearest
    samples: int
    discarded: int


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("OVERLAPS_THREADS", "1") or 1)
    return max(1, int(threads))


def split_budget(budget: int, streams: int) -> list[int]:
    base, extra = divmod(budget, streams)
    return [base + (1 if i < extra else 0) for i in range(streams)]


def _map(fn, tasks, threads: int):
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(threads, len(tasks))) as ex:
        return list(ex.map(fn, tasks))


def _check_targets(spec: EnsembleSpec, targets, hy: float | None) -> list[ComplexPoint]:
    pts = [ComplexPoint.of(t) for t in targets]
    if spec.is_real:
        for p in pts:
            if p.y == 0.0:
                raise DomainError("eginoe targets need y != 0 (complex eigenvalues only)")
            if hy is not None and abs(p.y) <= hy:
                raise DomainError(f"window around {p} touches the real axis; shrink hy")
    return pts


def _box_hits(w: np.ndarray, p: ComplexPoint, hx: float, hy: float) -> np.ndarray:
    return (np.abs(w.real - p.x) <= hx) & (np.abs(w.imag - p.y) <= hy)


def _trim(keys: np.ndarray, vals: np.ndarray, k: int):
    if keys.shape[0] <= k:
        order = np.lexsort(keys.T[::-1])
    else:
        order = np.lexsort(keys.T[::-1])[:k]
    return keys[order], vals[order]


def _run_task(args, spec: EnsembleSpec, targets: list[ComplexPoint], cfg: MCConfig) -> _TaskResult:
    stream_id, count = args
    hx, hy = cfg.half_widths(spec.n)
    method = cfg.resolved_method(spec.n)
    knn = cfg.mode is WindowMode.KNEAREST
    hits = [[] for _ in targets]
    near = [(np.empty((0, 4)), np.empty(0)) for _ in targets]
    discarded = 0
    stream = SeededStream(cfg.seed, stream_id)
    for start, xs in iter_samples(spec, stream, count):
        if method == "full":
            w, ov, res = decompose_batch(xs)
            ok = res <= RESIDUAL_DISCARD
            discarded += int(np.count_nonzero(~ok))
            if spec.is_real:
                # real eigenvalues never enter complex-eigenvalue statistics
                cplx = w.imag != 0.0
            else:
                cplx = np.ones(w.shape, dtype=bool)
            valid = cplx & ok[:, None]
            for t, p in enumerate(targets):
                if knn:
                    d = np.abs(w - p.z)
                    bi, ei = np.nonzero(valid)
                    keys = np.column_stack([d[bi, ei], np.full(bi.size, stream_id), bi + start, ei]).astype(float)
                    k0, v0 = near[t]
                    near[t] = _trim(np.vstack([k0, keys]), np.concatenate([v0, ov[bi, ei]]), cfg.k)
                else:
                    m = _box_hits(w, p, hx, hy) & valid
                    if m.any():
                        hits[t].append(ov[m])
        else:
            for x in xs:
                w = np.linalg.eigvals(x).astype(complex)
                w = w[_sort_order(w)]
                masks = [_box_hits(w, p, hx, hy) for p in targets]
                sel = np.zeros(w.shape, bool)
                for m in masks:
                    sel |= m
                if not sel.any():
                    continue
                ov_sel, res = targeted_overlaps(x, w[sel])
                if np.any(res > RESIDUAL_DISCARD):
                    discarded += 1
                    continue
                ov = np.empty(w.shape)
                ov[sel] = ov_sel
                for t, m in enumerate(masks):
                    if m.any():
                        hits[t].append(ov[m])
    accs = [Accumulator.of(np.concatenate(h)) if h else Accumulator() for h in hits]
    return _TaskResult(accs, near, count, discarded)


def conditional_overlap_estimate(spec: EnsembleSpec, targets, cfg: MCConfig) -> MCResult:
    """Conditional mean self-overlap near each target point.

    Box mode averages O_nn over all eigenvalues with ``|Re - x| <= hx`` and
    ``|Im - y| <= hy``.  k-nearest mode averages the ``k`` eigenvalues
    closest to the target over the whole run (ties broken by stream,
    sample index, eigenvalue index).  For the real ensemble only non-real
    eigenvalues are used.
    """
    hx, hy = cfg.half_widths(spec.n)
    pts = _check_targets(spec, targets, hy if cfg.mode is WindowMode.BOX else None)
    tasks = list(enumerate(split_budget(cfg.budget, cfg.streams)))
    tasks = [t for t in tasks if t[1] > 0]
    fn = partial(_run_task, spec=spec, targets=pts, cfg=cfg)
    results = _map(fn, tasks, resolve_threads(cfg.threads))
    samples = sum(r.samples for r in results)
    discarded = sum(r.discarded for r in results)
    estimates = []
    for t, p in enumerate(pts):
        if cfg.mode is WindowMode.BOX:
            acc = pairwise_merge([r.accs[t] for r in results], Accumulator.merge)
            window = (hx, hy)
        else:
            keys = np.vstack([r.near[t][0] for r in results])
            vals = np.concatenate([r.near[t][1] for r in results])
            _, vals = _trim(keys, vals, cfg.k)
            acc = Accumulator.of(vals)
            window = cfg.k
        flag = FLAG_NO_HITS if acc.count == 0 else None
        mean = acc.mean if acc.count else math.nan
        estimates.append(ConditionalEstimate(p, cfg.mode, window, mean, acc.std_error, acc.count, flag))
    meta = {
        "rng": GENERATOR,
        "method": cfg.resolved_method(spec.n),
        "window_shape": cfg.mode.value,
        "hx": hx,
        "hy": hy,
        "k": cfg.k,
        "streams": cfg.streams,
        "seed": cfg.seed,
    }
    return MCResult(estimates, samples, discarded, meta)


# --- density histograms ---------------------------------------------------------------


@dataclass
class HistogramResult:
    counts: np.ndarray
    x_edges: np.ndarray
    y_edges: np.ndarray
    samples: int
    discarded: int
    outside: int

    def density(self) -> np.ndarray:
        """``count / (samples * bin area)``, comparable with densities integrating to N."""
        area = np.outer(np.diff(self.x_edges), np.diff(self.y_edges))
        return self.counts / (self.samples - self.discarded) / area

    def std_error(self) -> np.ndarray:
        area = np.outer(np.diff(self.x_edges), np.diff(self.y_edges))
        return np.sqrt(self.counts) / (self.samples - self.discarded) / area


def _hist_task(args, spec, x_edges, y_edges, seed, complex_only):
    stream_id, count = args
    counts = np.zeros((len(x_edges) - 1, len(y_edges) - 1), dtype=np.int64)
    outside = 0
    for _, xs in iter_samples(spec, SeededStream(seed, stream_id), count):
        w = np.linalg.eigvals(xs).astype(complex).ravel()
        if complex_only:
            w = w[w.imag != 0.0]
        c, _, _ = np.histogram2d(w.real, w.imag, bins=[x_edges, y_edges])
        counts += c.astype(np.int64)
        outside += int(w.size - c.sum())
    return counts, outside


def density_histogram(spec: EnsembleSpec, x_edges, y_edges, budget: int, seed: int = 0,
                      streams: int = 8, threads: int | None = None,
                      complex_only: bool | None = None) -> HistogramResult:
    """Eigenvalue counts on a rectangular grid (complex eigenvalues only for eginoe)."""
    x_edges = np.asarray(x_edges, float)
    y_edges = np.asarray(y_edges, float)
    if complex_only is None:
        complex_only = spec.is_real
    tasks = [t for t in enumerate(split_budget(int(budget), streams)) if t[1] > 0]
    fn = partial(_hist_task, spec=spec, x_edges=x_edges, y_edges=y_edges, seed=seed,
                 complex_only=complex_only)
    parts = _map(fn, tasks, resolve_threads(threads))
    counts = pairwise_merge([p[0] for p in parts], np.add)
    outside = sum(p[1] for p in parts)
    return HistogramResult(counts, x_edges, y_edges, int(budget), 0, outside)
