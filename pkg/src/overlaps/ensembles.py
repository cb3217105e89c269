"""Ensemble and query-point descriptors shared across the package."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .specfun import DomainError


class Kind(str, enum.Enum):
    COMPLEX = "eginue"  # complex elliptic Ginibre
    REAL = "eginoe"  # real elliptic Ginibre

    @classmethod
    def parse(cls, name: str) -> "Kind":
        try:
            return cls(name.lower())
        except ValueError:
            raise DomainError(f"unknown ensemble {name!r}; expected 'eginue' or 'eginoe'") from None


@dataclass(frozen=True)
class EnsembleSpec:
    """Which ensemble, matrix size ``n`` and ellipticity ``tau``."""

    kind: Kind
    n: int
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"matrix size n must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not 0.0 <= self.tau <= 1.0:
            raise DomainError(f"tau must lie in [0, 1], got {self.tau}")

    @property
    def is_real(self) -> bool:
        return self.kind is Kind.REAL

    def with_n(self, n: int) -> "EnsembleSpec":
        return EnsembleSpec(self.kind, n, self.tau)


@dataclass(frozen=True)
class ComplexPoint:
    """A point ``z = x + i y`` of the spectral plane."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError(f"point must be finite, got ({self.x}, {self.y})")

    @classmethod
    def of(cls, z) -> "ComplexPoint":
        if isinstance(z, ComplexPoint):
            return z
        if isinstance(z, (tuple, list)):
            return cls(float(z[0]), float(z[1]))
        z = complex(z)
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


def wnh_tau(n: int, alpha: float) -> float:
    """Ellipticity on the weak non-Hermiticity scale, ``1 - (pi alpha)^2 / (2n)``."""
    return 1.0 - (math.pi * alpha) ** 2 / (2.0 * n)


def snh_point(n: int, wx: float, wy: float) -> ComplexPoint:
    """Bulk scaling ``z = sqrt(n) w``."""
    r = math.sqrt(n)
    return ComplexPoint(r * wx, r * wy)


def depletion_point(n: int, delta: float, xi: float) -> ComplexPoint:
    """Depletion-strip scaling ``z = sqrt(n) delta + i xi``."""
    return ComplexPoint(math.sqrt(n) * delta, xi)


def wnh_point(n: int, X: float, y: float) -> ComplexPoint:
    """Weak-bulk scaling ``z = sqrt(n) X + i pi y / sqrt(n)``."""
    r = math.sqrt(n)
    return ComplexPoint(r * X, math.pi * y / r)
