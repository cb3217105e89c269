"""Elliptic Ginibre matrix sampling with reproducible, independent streams.

Each Monte Carlo task owns one :class:`SeededStream`: a Philox
counter-based bit generator keyed by ``SeedSequence([seed, stream_id])``.
Normals come from numpy's ziggurat sampler.  The pair (seed, stream_id)
fully determines the matrix sequence, independent of how tasks are spread
over workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ensembles import EnsembleSpec, Kind
from .specfun import DomainError

GENERATOR = "philox+ziggurat"


@dataclass(frozen=True)
class SeededStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if int(v) != v or not 0 <= v < 2**64:
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {v}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence([int(self.seed), int(self.stream_id)])
        return np.random.Generator(np.random.Philox(ss))


@dataclass
class MatrixSample:
    entries: np.ndarray
    spec: EnsembleSpec
    meta: dict = field(default_factory=dict)


def eginue_batch(rng: np.random.Generator, n: int, tau: float, count: int) -> np.ndarray:
    """``count`` complex elliptic matrices, shape ``(count, n, n)``.

    ``X = sqrt(1+tau) H1 + i sqrt(1-tau) H2`` with ``H = (G + G^dagger)/2``
    and ``G`` having i.i.d. standard complex normal entries (``E|G_ij|^2 = 1``).
    """
    shape = (count, n, n)
    s = 1.0 / math.sqrt(2.0)
    g1 = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * s
    g2 = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * s
    h1 = 0.5 * (g1 + np.conj(np.swapaxes(g1, -1, -2)))
    h2 = 0.5 * (g2 + np.conj(np.swapaxes(g2, -1, -2)))
    return math.sqrt(1.0 + tau) * h1 + 1j * (math.sqrt(1.0 - tau) * h2)


def eginoe_batch(rng: np.random.Generator, n: int, tau: float, count: int) -> np.ndarray:
    """``count`` real elliptic matrices, ``X = sqrt(1+tau) H + sqrt(1-tau) A``."""
    shape = (count, n, n)
    g = rng.standard_normal(shape)
    g2 = rng.standard_normal(shape)
    h = 0.5 * (g + np.swapaxes(g, -1, -2))
    a = 0.5 * (g2 - np.swapaxes(g2, -1, -2))
    return math.sqrt(1.0 + tau) * h + math.sqrt(1.0 - tau) * a


def sample_batch(spec: EnsembleSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    if spec.kind is Kind.REAL:
        return eginoe_batch(rng, spec.n, spec.tau, count)
    return eginue_batch(rng, spec.n, spec.tau, count)


def sample_eginue(spec: EnsembleSpec, stream: SeededStream) -> MatrixSample:
    """First matrix of ``stream`` for the complex ensemble."""
    if spec.kind is not Kind.COMPLEX:
        raise DomainError("sample_eginue needs a complex (eginue) ensemble")
    x = eginue_batch(stream.generator(), spec.n, spec.tau, 1)[0]
    return MatrixSample(x, spec, {"seed": stream.seed, "stream": stream.stream_id, "rng": GENERATOR})


def sample_eginoe(spec: EnsembleSpec, stream: SeededStream) -> MatrixSample:
    """First matrix of ``stream`` for the real ensemble."""
    if spec.kind is not Kind.REAL:
        raise DomainError("sample_eginoe needs a real (eginoe) ensemble")
    x = eginoe_batch(stream.generator(), spec.n, spec.tau, 1)[0]
    return MatrixSample(x, spec, {"seed": stream.seed, "stream": stream.stream_id, "rng": GENERATOR})


def chunk_size(n: int) -> int:
    """Matrices per generation call; depends on n only so draws never depend on budgets."""
    return max(1, min(4096, 40_000 // (n * n)))


def iter_samples(spec: EnsembleSpec, stream: SeededStream, count: int):
    """Yield ``(index, batch)`` pairs covering ``count`` matrices from one stream."""
    rng = stream.generator()
    c = chunk_size(spec.n)
    done = 0
    while done < count:
        b = min(c, count - done)
        yield done, sample_batch(spec, rng, c)[:b]
        done += b


def log_jpdf(x: np.ndarray, kind, tau: float) -> np.ndarray:
    """Log joint density of the matrix entries (Lebesgue measure on the entries).

    Complex: ``exp[-Tr(XX^dagger - tau Re X^2)/(1-tau^2)] / (pi^{N^2} (1-tau^2)^{N^2/2})``.
    Real: ``exp[-Tr(XX^T - tau X^2)/(2(1-tau^2))]`` over
    ``(2 pi)^{N^2/2} (1+tau)^{N(N+1)/4} (1-tau)^{N(N-1)/4}``.
    Accepts a single matrix or a stack.
    """
    kind = Kind(kind)
    if not 0.0 <= tau < 1.0:
        raise DomainError(f"the joint density needs 0 <= tau < 1, got {tau}")
    x = np.asarray(x)
    n = x.shape[-1]
    fro = np.sum(np.abs(x) ** 2, axis=(-2, -1))
    tr_sq = np.einsum("...ij,...ji->...", x, x)
    c = 1.0 - tau * tau
    if kind is Kind.COMPLEX:
        expo = -(fro - tau * tr_sq.real) / c
        return expo - n * n * math.log(math.pi) - 0.5 * n * n * math.log(c)
    expo = -(fro - tau * tr_sq.real) / (2.0 * c)
    return (
        expo
        - 0.5 * n * n * math.log(2.0 * math.pi)
        - 0.25 * n * (n + 1) * math.log1p(tau)
        - 0.25 * n * (n - 1) * math.log1p(-tau)
    )
