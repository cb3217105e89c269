"""Special functions with overflow-safe exponent tracking.

Hermite polynomials here are the monic ("probabilists'") family
``He_{k+1}(x) = x He_k(x) - k He_{k-1}(x)``.  Sums over Hermite products reach
``exp(+-700)`` already for N of a few hundred, so values are carried either as
:class:`ScaledValue` (mantissa, natural-log exponent) or directly as logs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

__all__ = [
    "DomainError",
    "NumericalFailure",
    "ScaledValue",
    "hermite_he",
    "hermite_he_scaled",
    "hermite_pair_sequence",
    "log_hermite_weights",
    "theta_ratio",
    "erfc",
    "erfcx",
    "log_erfc",
]

_BAND_LO = 1e-8
_BAND_HI = 1e8
# rescale threshold inside recurrences; far from the double overflow limit
_RESCALE = 1e150


class DomainError(ValueError):
    """Raised when an argument violates a documented precondition."""


class NumericalFailure(RuntimeError):
    """Raised when a computation cannot reach its accuracy target."""


@dataclass(frozen=True)
class ScaledValue:
    """A complex number stored as ``mantissa * exp(log_scale)``.

    The mantissa magnitude is kept in ``[1e-8, 1e8]`` (or the value is an
    exact zero with ``log_scale == 0``).
    """

    mantissa: complex
    log_scale: float = 0.0

    def __post_init__(self):
        m = complex(self.mantissa)
        s = float(self.log_scale)
        if m == 0:
            m, s = 0j, 0.0
        else:
            a = abs(m)
            if not (_BAND_LO <= a <= _BAND_HI):
                k = math.log(a)
                m = m / a
                s += k
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "log_scale", s)

    @classmethod
    def from_log(cls, log_abs: float, phase: complex = 1.0) -> "ScaledValue":
        if log_abs == -math.inf:
            return cls(0j, 0.0)
        return cls(complex(phase), log_abs)

    @property
    def value(self) -> complex:
        return self.mantissa * math.exp(self.log_scale) if self.mantissa else 0j

    def log_abs(self) -> float:
        if self.mantissa == 0:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.log_scale

    def conjugate(self) -> "ScaledValue":
        return ScaledValue(self.mantissa.conjugate(), self.log_scale)

    def __mul__(self, other):
        if isinstance(other, ScaledValue):
            return ScaledValue(self.mantissa * other.mantissa, self.log_scale + other.log_scale)
        return ScaledValue(self.mantissa * other, self.log_scale)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ScaledValue):
            return ScaledValue(self.mantissa / other.mantissa, self.log_scale - other.log_scale)
        return ScaledValue(self.mantissa / other, self.log_scale)

    def __neg__(self):
        return ScaledValue(-self.mantissa, self.log_scale)

    def __add__(self, other):
        if not isinstance(other, ScaledValue):
            other = ScaledValue(other)
        if self.mantissa == 0:
            return other
        if other.mantissa == 0:
            return self
        if self.log_scale >= other.log_scale:
            big, small = self, other
        else:
            big, small = other, self
        d = small.log_scale - big.log_scale
        if d < -745.0:
            return big
        return ScaledValue(big.mantissa + small.mantissa * math.exp(d), big.log_scale)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, ScaledValue):
            other = ScaledValue(other)
        return self + (-other)


def hermite_he(k: int, x: complex) -> complex:
    """Monic Hermite polynomial ``He_k(x)`` by forward recurrence."""
    if k < 0:
        raise DomainError(f"Hermite order must be >= 0, got {k}")
    if k == 0:
        return 1.0 + 0 * x
    prev, cur = 1.0 + 0 * x, x
    for j in range(1, k):
        prev, cur = cur, x * cur - j * prev
    return cur


def hermite_he_scaled(K: int, x: complex) -> list[ScaledValue]:
    """``He_0(x) .. He_K(x)`` as ScaledValues, safe for large K and |x|."""
    if K < 0:
        raise DomainError(f"K must be >= 0, got {K}")
    x = complex(x)
    out = [ScaledValue(1.0)]
    if K == 0:
        return out
    a, b, log_s = 1.0 + 0j, x, 0.0
    out.append(ScaledValue(b, log_s))
    for k in range(1, K):
        a, b = b, x * b - k * a
        m = max(abs(a), abs(b))
        if m > _RESCALE or 0 < m < 1 / _RESCALE:
            a, b = a / m, b / m
            log_s += math.log(m)
        out.append(ScaledValue(b, log_s))
    return out


def hermite_pair_sequence(K: int, z: complex, tau: float) -> list[ScaledValue]:
    """Terms ``tau^k/k! He_k(z/sqrt(tau)) He_k(conj(z)/sqrt(tau))`` for k = 0..K.

    Each term is the product of a value with its conjugate, so it is real
    and non-negative up to rounding.
    """
    if not 0 < tau <= 1:
        raise DomainError(f"tau must lie in (0, 1], got {tau}; use the tau -> 0 limit path")
    if K < 0:
        raise DomainError(f"K must be >= 0, got {K}")
    z = complex(z)
    r = math.sqrt(tau)
    he = hermite_he_scaled(K, z / r)
    he_bar = hermite_he_scaled(K, z.conjugate() / r)
    log_tau = math.log(tau)
    return [
        he[k] * he_bar[k] * ScaledValue.from_log(k * log_tau - math.lgamma(k + 1))
        for k in range(K + 1)
    ]


def log_hermite_weights(K: int, z: complex, tau: float) -> np.ndarray:
    """``log(tau^k/k! |He_k(z/sqrt(tau))|^2)`` for k = 0..K, with tau in [0, 1].

    Runs the recurrence on ``g_k = tau^(k/2) He_k(z/sqrt(tau)) / sqrt(k!)``::

        g_{k+1} = (z g_k - tau sqrt(k) g_{k-1}) / sqrt(k+1)

    which never divides by tau; at tau = 0 it yields ``|z|^(2k)/k!`` exactly
    (the GinUE/GinOE limit).  Zero terms come back as ``-inf``.
    """
    if not 0 <= tau <= 1:
        raise DomainError(f"tau must lie in [0, 1], got {tau}")
    if K < 0:
        return np.empty(0)
    z = complex(z)
    out = np.empty(K + 1)
    out[0] = 0.0
    a, b, log_s = 0j, 1.0 + 0j, 0.0  # a = g_{k-1}, b = g_k, both times exp(-log_s)
    for k in range(K):
        a, b = b, (z * b - tau * math.sqrt(k) * a) / math.sqrt(k + 1)
        m = max(abs(a), abs(b))
        if m > _RESCALE or 0 < m < 1 / _RESCALE:
            a, b = a / m, b / m
            log_s += math.log(m)
        ab = abs(b)
        out[k + 1] = 2.0 * (math.log(ab) + log_s) if ab > 0 else -math.inf
    return out


# --- regularized incomplete gamma -------------------------------------------

_EPS = 1e-16
_ITMAX = 10_000


def _gamma_p_series(a: float, t: float) -> float:
    # P(a, t) = e^-t t^a / Gamma(a+1) * sum_n t^n / ((a+1)...(a+n))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_ITMAX):
        ap += 1.0
        term *= t / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-t + a * math.log(t) - math.lgamma(a))


def _gamma_q_contfrac(a: float, t: float) -> float:
    # modified Lentz evaluation of the Legendre continued fraction for Q(a, t)
    tiny = 1e-300
    b = t + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _ITMAX):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-t + a * math.log(t) - math.lgamma(a)) * h


def theta_ratio(N: int, M: int, x: float) -> float:
    """``Gamma(N-M+1, N x) / Gamma(N-M+1)``, the smoothed step ``Theta_N^(M)(x)``.

    For x >= 0 the value lies in [0, 1] and is computed from the series
    (``N x < N-M+2``) or the continued fraction (otherwise).  Negative x is
    accepted through the exact finite sum ``e^{-Nx} sum_{k<=N-M} (Nx)^k/k!``,
    which exceeds 1 there; integral representations need that branch.
    """
    a = N - M + 1
    if int(a) != a or a < 1:
        raise DomainError(f"theta_ratio needs integer N - M + 1 >= 1, got N={N}, M={M}")
    t = N * x
    if t < 0:
        return _finite_gamma_sum(a, t)
    if t == 0:
        return 1.0
    if t < a + 1:
        return min(1.0, max(0.0, 1.0 - _gamma_p_series(a, t)))
    return min(1.0, max(0.0, _gamma_q_contfrac(a, t)))


def _finite_gamma_sum(a: int, t: float) -> float:
    term, total = 1.0, 1.0
    for k in range(1, a):
        term *= t / k
        total += term
    return math.exp(-t) * total


# --- error functions ----------------------------------------------------------


def erfc(x: float) -> float:
    """Complementary error function."""
    return float(_sp.erfc(x))


def erfcx(x: float) -> float:
    """Scaled complementary error function ``exp(x^2) erfc(x)``."""
    return float(_sp.erfcx(x))


def log_erfc(x: float) -> float:
    """``log(erfc(x))`` without underflow for large positive x."""
    if x < 5.0:
        return math.log(_sp.erfc(x))
    return math.log(_sp.erfcx(x)) - x * x
