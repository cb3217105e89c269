"""Large-N regime formulas and integral-representation oracles.

Regimes
-------
* strong non-Hermiticity (SNH), ``tau`` fixed: bulk ``z = sqrt(N) w`` and,
  for the real ensemble, the depletion strip ``z = sqrt(N) delta + i xi``.
  Overlaps are scaled by ``1/N``; densities are unscaled.
* weak non-Hermiticity (WNH), ``tau = 1 - (pi alpha)^2 / (2N)`` with
  ``z = sqrt(N) X + i pi y / sqrt(N)``.  Both overlaps and densities are
  scaled by ``pi^2 / N``, so the conditional overlap has no N factor.

The WNH integrands multiply ``cosh``/``sinh(2yu)`` against Gaussians; they
are rewritten as shifted Gaussians (completed squares) so no large factors
cancel.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .ensembles import Kind
from .specfun import DomainError, NumericalFailure, erfcx, theta_ratio

SQRT2 = math.sqrt(2.0)
QUAD_ABS = 1e-10
QUAD_REL = 1e-8


class Regime(str, enum.Enum):
    SNH_BULK = "snh-bulk"
    SNH_DEPLETION = "snh-depletion"
    WNH_BULK = "wnh-bulk"


@dataclass(frozen=True)
class RegimeQuery:
    """An asymptotic-regime evaluation request.

    ``coords`` holds ``(w_x, w_y)`` for the SNH bulk, ``(delta, xi)`` for the
    depletion strip and ``(X, y)`` for the WNH bulk.
    """

    regime: Regime
    coords: tuple[float, float]
    tau: float | None = None
    alpha: float | None = None
    kind: Kind = Kind.REAL

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.regime is Regime.WNH_BULK:
            if self.alpha is None or not self.alpha > 0:
                raise DomainError(f"WNH regime needs alpha > 0, got {self.alpha}")
        else:
            if self.tau is None or not 0.0 <= self.tau < 1.0:
                raise DomainError(f"SNH regimes need 0 <= tau < 1, got {self.tau}")
        if self.regime is Regime.SNH_DEPLETION and self.kind is not Kind.REAL:
            raise DomainError("the depletion regime exists only for the eginoe ensemble")

    def overlap(self) -> float:
        a, b = self.coords
        if self.regime is Regime.SNH_BULK:
            return snh_bulk_overlap(self.tau, a, b)
        if self.regime is Regime.SNH_DEPLETION:
            return snh_depletion_overlap(self.tau, a, b)
        if self.kind is Kind.REAL:
            return wnh_bulk_overlap_eginoe(self.alpha, a, b)
        return wnh_bulk_overlap_eginue(self.alpha, a, b)

    def density(self) -> float:
        a, b = self.coords
        if self.regime is Regime.SNH_BULK:
            return snh_bulk_density(self.tau, a, b)
        if self.regime is Regime.SNH_DEPLETION:
            return snh_depletion_density(self.tau, a, b)
        return wnh_density(self.kind, self.alpha, a, b)

    def conditional(self, n: int | None = None) -> float | None:
        """Limiting conditional overlap.

        For SNH regimes this is ``E/N``; pass ``n`` to get the unscaled value.
        None when the limiting density vanishes.
        """
        d = self.density()
        if d <= 0.0:
            return None
        e = self.overlap() / d
        if n is not None and self.regime is not Regime.WNH_BULK:
            e *= n
        return e


# --- strong non-Hermiticity -----------------------------------------------------


def ellipse_form(tau: float, wx: float, wy: float) -> float:
    return wx * wx / (1.0 + tau) ** 2 + wy * wy / (1.0 - tau) ** 2


def snh_bulk_overlap(tau: float, wx: float, wy: float) -> float:
    """Limit of ``O_N(sqrt(N) w) / N`` in the bulk; identical for both ensembles."""
    e = 1.0 - ellipse_form(tau, wx, wy)
    return e / math.pi if e > 0 else 0.0


def snh_bulk_density(tau: float, wx: float, wy: float) -> float:
    """Limiting bulk density ``1/(pi (1-tau^2))`` inside the ellipse."""
    return 1.0 / (math.pi * (1.0 - tau * tau)) if ellipse_form(tau, wx, wy) < 1.0 else 0.0


def snh_bulk_conditional(tau: float, wx: float, wy: float) -> float:
    """``E / N`` in the bulk, ``(1-tau^2)(1 - ellipse form)``; 0 outside."""
    return max(0.0, (1.0 - tau * tau) * (1.0 - ellipse_form(tau, wx, wy)))


def _depletion_u(tau: float, xi: float) -> float:
    return math.sqrt(2.0 / (1.0 - tau * tau)) * abs(xi)


def snh_depletion_overlap(tau: float, delta: float, xi: float) -> float:
    """Limit of ``O_N(sqrt(N) delta + i xi) / N`` in the real-ensemble depletion strip."""
    if xi == 0.0:
        raise DomainError("depletion overlap requires xi != 0")
    step = 1.0 - delta * delta / (1.0 + tau) ** 2
    if step <= 0.0:
        return 0.0
    c = 1.0 - tau * tau
    bracket = 1.0 + math.sqrt(math.pi * c / 2.0) * erfcx(_depletion_u(tau, xi)) / (2.0 * abs(xi))
    return bracket * step / math.pi


def snh_depletion_density(tau: float, delta: float, xi: float) -> float:
    """Limiting complex-eigenvalue density in the depletion strip, even in ``xi``."""
    if 1.0 - delta * delta / (1.0 + tau) ** 2 <= 0.0:
        return 0.0
    c = 1.0 - tau * tau
    return math.sqrt(2.0 / math.pi) * c ** -1.5 * abs(xi) * erfcx(_depletion_u(tau, xi))


def snh_depletion_conditional(tau: float, delta: float, xi: float) -> float | None:
    """``E / N`` in the depletion strip; None outside the droplet."""
    d = snh_depletion_density(tau, delta, xi)
    return snh_depletion_overlap(tau, delta, xi) / d if d > 0 else None


# --- weak non-Hermiticity -------------------------------------------------------


def _u_max(X: float) -> float:
    r = 1.0 - X * X / 4.0
    return math.pi * math.sqrt(r) if r > 0 else 0.0


def _quad(f, a: float, b: float, epsabs: float = QUAD_ABS, epsrel: float = QUAD_REL, points=None) -> float:
    if b <= a:
        return 0.0
    val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=200, points=points)
    if not math.isfinite(val) or err > max(10 * epsabs, 10 * epsrel * abs(val)):
        raise NumericalFailure(f"quadrature did not converge on [{a}, {b}]: value {val}, error {err}")
    return val


def _peak(alpha: float, y: float, a: float, b: float):
    c = 2.0 * abs(y) / (alpha * alpha)
    return [c] if a < c < b else None


def _cosh_gauss(alpha: float, y: float):
    # exp(-2y^2/a^2) exp(-a^2 u^2/2) cosh(2yu)
    b = 2.0 * abs(y) / alpha

    def g(u):
        return 0.5 * (math.exp(-0.5 * (alpha * u - b) ** 2) + math.exp(-0.5 * (alpha * u + b) ** 2))

    return g


def _sinh_gauss(alpha: float, y: float):
    # exp(-2y^2/a^2) exp(-a^2 u^2/2) sinh(2|y|u), u >= 0
    b = 2.0 * abs(y) / alpha
    ay = abs(y)

    def g(u):
        return 0.5 * math.exp(-0.5 * (alpha * u - b) ** 2) * -math.expm1(-4.0 * ay * u)

    return g


def _wnh_weight(alpha: float, X: float):
    s = 1.0 - X * X / 4.0
    a2p2 = (alpha * math.pi) ** 2

    def w(u):
        return 1.0 + a2p2 * (s - u * u / math.pi**2)

    return w


def wnh_bulk_overlap_eginue(alpha: float, X: float, y: float, epsabs: float = QUAD_ABS,
                            epsrel: float = QUAD_REL) -> float:
    """Limit of ``(pi^2/N) O_N`` in the weak bulk of the complex ensemble."""
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    um = _u_max(X)
    g, w = _cosh_gauss(alpha, y), _wnh_weight(alpha, X)
    val = _quad(lambda u: g(u) * w(u), 0.0, um, epsabs, epsrel, _peak(alpha, y, 0.0, um))
    return SQRT2 / math.pi**1.5 / alpha * val


def wnh_bulk_overlap_eginoe(alpha: float, X: float, y: float, epsabs: float = QUAD_ABS,
                            epsrel: float = QUAD_REL) -> float:
    """Limit of ``(pi^2/N) O_N`` at complex eigenvalues in the weak bulk of the real ensemble."""
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    if y == 0.0:
        raise DomainError("eginoe weak-bulk overlap requires y != 0")
    ay = abs(y)
    um = _u_max(X)
    g, w = _sinh_gauss(alpha, y), _wnh_weight(alpha, X)
    val = _quad(lambda u: u * g(u) * w(u), 0.0, um, epsabs, epsrel, _peak(alpha, y, 0.0, um))
    bracket = 1.0 + math.sqrt(math.pi / 2.0) * alpha / (2.0 * ay) * erfcx(SQRT2 * ay / alpha)
    return alpha / (SQRT2 * math.pi**1.5 * ay) * bracket * val


def wnh_density(kind, alpha: float, X: float, y: float, epsabs: float = QUAD_ABS,
                epsrel: float = QUAD_REL) -> float:
    """Limit of ``(pi^2/N) rho_N`` in the weak bulk; complex eigenvalues only for eginoe."""
    kind = Kind(kind)
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    um = _u_max(X)
    pts = _peak(alpha, y, 0.0, um)
    if kind is Kind.COMPLEX:
        g = _cosh_gauss(alpha, y)
        return SQRT2 / math.pi**1.5 / alpha * _quad(g, 0.0, um, epsabs, epsrel, pts)
    if y == 0.0:
        raise DomainError("eginoe complex-eigenvalue density requires y != 0")
    g = _sinh_gauss(alpha, y)
    # erfc(s) = erfcx(s) exp(-s^2); exp(-s^2) is absorbed into g
    return erfcx(SQRT2 * abs(y) / alpha) / math.pi * _quad(lambda u: u * g(u), 0.0, um, epsabs, epsrel, pts)


def wnh_conditional(kind, alpha: float, X: float, y: float) -> float | None:
    """Limiting conditional overlap ``O/rho`` in the weak bulk (no N factor)."""
    kind = Kind(kind)
    d = wnh_density(kind, alpha, X, y)
    if d <= 0.0:
        return None
    o = wnh_bulk_overlap_eginoe(alpha, X, y) if kind is Kind.REAL else wnh_bulk_overlap_eginue(alpha, X, y)
    return o / d


class Fixed(str, enum.Enum):
    X = "X"
    Y = "y"


def _y_extent(kind: Kind, alpha: float, X: float) -> float:
    # walk outward until the density drops below 1e-16 of the running peak
    step = 0.25 * alpha
    yv, peak = step, 0.0
    while True:
        v = wnh_density(kind, alpha, X, yv)
        peak = max(peak, v)
        if v < 1e-16 * peak or yv > 1e3 * alpha:
            return yv
        yv += step


def wnh_normalizer(kind, alpha: float, fixed: Fixed, fixed_value: float) -> float:
    kind, fixed = Kind(kind), Fixed(fixed)
    if fixed is Fixed.Y:
        if kind is Kind.REAL and fixed_value == 0.0:
            raise DomainError("eginoe conditional density at fixed y requires y != 0")
        return _quad(lambda X: wnh_density(kind, alpha, X, fixed_value), -2.0, 2.0, 1e-13, 1e-10)
    top = _y_extent(kind, alpha, fixed_value)

    def f(yv):
        if yv == 0.0 and kind is Kind.REAL:
            return 0.0
        return wnh_density(kind, alpha, fixed_value, yv)

    return 2.0 * _quad(f, 0.0, top, 1e-13, 1e-10)


def wnh_conditional_density(kind, alpha: float, fixed, fixed_value: float, query: float,
                            norm: float | None = None) -> float:
    """Density at the free coordinate ``query`` normalized over that coordinate.

    ``fixed = "y"`` normalizes over ``X`` in [-2, 2]; ``fixed = "X"``
    normalizes over all real y.  Pass ``norm`` to reuse a normalizer.
    """
    kind, fixed = Kind(kind), Fixed(fixed)
    if norm is None:
        norm = wnh_normalizer(kind, alpha, fixed, fixed_value)
    if not norm > 0:
        raise DomainError("normalizing integral vanishes")
    X, yv = (query, fixed_value) if fixed is Fixed.Y else (fixed_value, query)
    if kind is Kind.REAL and yv == 0.0:
        return 0.0
    return wnh_density(kind, alpha, X, yv) / norm


# --- integral-representation oracles --------------------------------------------


class OracleKind(str, enum.Enum):
    DENSITY = "density"
    R = "R"
    P = "P"
    T = "T"


@dataclass(frozen=True)
class OracleResult:
    value: float
    error: float
    converged: bool


def integral_rep_oracle(kind, n: int, z, tau: float, epsrel: float = 1e-9,
                        r_prefactor_power: int = 1) -> OracleResult:
    """Evaluate a double-integral representation of a finite-N building block.

    Quadrature oracle only (cost grows quickly with ``n``).  ``DENSITY`` and
    ``R`` use ``Theta_n^(1)``; ``P`` and ``T`` use ``Theta_n^(0)`` and
    ``Theta_n^(1)``.  The imaginary part of the q-integrand is odd in q, so
    only the cosine part is integrated.  ``r_prefactor_power`` selects the
    power of n in front of the ``R`` integral (1 is the value consistent with
    the density representation; 2 reproduces the alternative printed form).
    """
    kind = OracleKind(kind)
    if n > 14:
        raise DomainError(f"integral oracles are limited to n <= 14, got {n}")
    if not 0.0 < tau < 1.0:
        raise DomainError(f"integral oracles need 0 < tau < 1, got {tau}")
    z = complex(z)
    x, y = z.real, z.imag
    if kind in (OracleKind.P, OracleKind.T) and y == 0.0:
        raise DomainError("P and T oracles require y != 0")
    if kind is OracleKind.R and n <= 0:
        return OracleResult(0.0, 0.0, True)

    m_index = 0 if kind is OracleKind.P else 1
    s2n = math.sqrt(2.0 * n)
    weighted = kind in (OracleKind.R, OracleKind.T)
    p_moment = kind in (OracleKind.P, OracleKind.T)

    def integrand(q, p):
        h = 0.5 * (p * p - q * q)
        th = theta_ratio(n, m_index, h)
        if th == 0.0:
            return 0.0
        e = n * h - n / (2.0 * tau) * (p * p + q * q) - s2n * y / tau * p
        v = th * math.exp(e) * math.cos(s2n * x / tau * q)
        if weighted:
            v *= n * h
        if p_moment:
            v *= p
        return v

    width = 12.0 * math.sqrt(tau / (n * (1.0 - tau))) + 1.0 / math.sqrt(n)
    pc = -SQRT2 * y / (math.sqrt(n) * (1.0 - tau))
    val, err = integrate.dblquad(integrand, pc - width, pc + width, -width, width,
                                 epsabs=0.0, epsrel=epsrel)

    if kind in (OracleKind.DENSITY, OracleKind.R):
        pref_log = (
            -(abs(z) ** 2 - tau * (z * z).real) / (1.0 - tau * tau)
            + (z * z).real / tau
        )
        pref = n / (2.0 * math.pi**2 * tau) / math.sqrt(1.0 - tau * tau) * math.exp(pref_log)
        if kind is OracleKind.R:
            pref *= n ** (r_prefactor_power - 1)
    else:
        pref = -n * s2n / (2.0 * y) / (2.0 * math.pi * tau) * math.exp((x * x - y * y) / tau)
    value = pref * val
    converged = bool(np.isfinite(value)) and abs(err) <= 1e3 * epsrel * max(abs(val), 1e-300)
    return OracleResult(value, abs(pref * err), converged)


# --- regime windows ---------------------------------------------------------------


def regime_window(regime: str, n: int) -> tuple[float, float]:
    """Half-widths in z units of a ``+-1/sqrt(N)`` box in the regime's scaled coordinates."""
    r = math.sqrt(n)
    if regime == "finite":
        return 1.0 / r, 1.0 / r
    regime = Regime(regime)
    if regime is Regime.SNH_BULK:
        return 1.0, 1.0
    if regime is Regime.SNH_DEPLETION:
        return 1.0, 1.0 / r
    return 1.0, math.pi / n


def _box_ratio(fo, fd, x: float, y: float, hx: float, hy: float, nodes: int) -> float | None:
    u, w = np.polynomial.legendre.leggauss(nodes)
    num = den = 0.0
    for i in range(nodes):
        for j in range(nodes):
            px, py = x + hx * u[i], y + hy * u[j]
            ww = w[i] * w[j]
            num += ww * fo(px, py)
            den += ww * fd(px, py)
    return num / den if den > 0 else None


def depletion_window_conditional(tau: float, n: int, z, hx: float, hy: float, nodes: int = 12) -> float | None:
    """Unscaled conditional overlap ``N O_dep / rho_dep`` averaged over a box in z."""
    z = complex(z)
    if (z.imag - hy) * (z.imag + hy) <= 0:
        raise DomainError("window must not touch the real axis")
    r = math.sqrt(n)
    e = _box_ratio(lambda a, b: snh_depletion_overlap(tau, a / r, b),
                   lambda a, b: snh_depletion_density(tau, a / r, b), z.real, z.imag, hx, hy, nodes)
    return None if e is None else n * e


def bulk_window_conditional(tau: float, n: int, z, hx: float, hy: float, nodes: int = 12) -> float | None:
    """Unscaled SNH bulk conditional overlap averaged over a box in z."""
    z = complex(z)
    r = math.sqrt(n)
    e = _box_ratio(lambda a, b: snh_bulk_overlap(tau, a / r, b / r),
                   lambda a, b: snh_bulk_density(tau, a / r, b / r), z.real, z.imag, hx, hy, nodes)
    return None if e is None else n * e


def wnh_window_conditional(kind, alpha: float, n: int, z, hx: float, hy: float, nodes: int = 8) -> float | None:
    """WNH conditional overlap averaged over a box given in z units."""
    kind = Kind(kind)
    z = complex(z)
    if kind is Kind.REAL and (z.imag - hy) * (z.imag + hy) <= 0:
        raise DomainError("window must not touch the real axis")
    r = math.sqrt(n)
    ov = wnh_bulk_overlap_eginoe if kind is Kind.REAL else wnh_bulk_overlap_eginue
    return _box_ratio(lambda a, b: ov(alpha, a / r, b * r / math.pi),
                      lambda a, b: wnh_density(kind, alpha, a / r, b * r / math.pi),
                      z.real, z.imag, hx, hy, nodes)
