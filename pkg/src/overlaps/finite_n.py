"""Exact finite-N densities, mean self-overlaps and conditional overlaps.

Densities follow the printed finite-N formulas, so the complex-ensemble
density integrates to N over the plane (not 1).  The conditional overlap
``overlap / density`` does not depend on that convention.

Every quantity reduces to a non-negatively weighted sum of the terms
``t_k = tau^k/k! |He_k(z/sqrt(tau))|^2`` (see
:func:`overlaps.specfun.log_hermite_weights`).  The double sums for
``P_n`` and ``T_n`` and the combined overlap brackets are evaluated in that
form, in log space, so nothing cancels and nothing overflows.  The
antisymmetric difference forms of ``P_n`` and ``T_n`` are kept as an
independent cross-check (:func:`p_n_difference`, :func:`t_n_difference`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .ensembles import ComplexPoint, EnsembleSpec, Kind
from .specfun import DomainError, ScaledValue, hermite_he_scaled, log_erfc, log_hermite_weights, erfcx

# below this tau the tau -> 0 limit of the Hermite terms is used
TAU_LIMIT = 1e-8
DENSITY_FLOOR = 1e-300
FLAG_UNDERFLOW = "density-underflow"


@dataclass(frozen=True)
class FiniteNResult:
    density: float
    overlap: float
    conditional: float | None
    flag: str | None = None
    log_density: float = -math.inf
    log_overlap: float = -math.inf


def _check_tau(tau: float) -> float:
    if not 0.0 <= tau < 1.0:
        raise DomainError(f"tau must lie in [0, 1) for finite-N formulas, got {tau}")
    return 0.0 if tau < TAU_LIMIT else tau


def _z(z) -> complex:
    return ComplexPoint.of(z).z


def _require_offaxis(z: complex) -> None:
    if z.imag == 0.0:
        raise DomainError("eGinOE complex-eigenvalue formulas require y != 0 (Im z = 0 is the real axis)")


def _logsum(logw: np.ndarray, coef: np.ndarray) -> float:
    """log(sum coef_k exp(logw_k)) for non-negative coef."""
    if logw.size == 0:
        return -math.inf
    with np.errstate(divide="ignore"):
        lc = np.log(coef)
    return float(logsumexp(logw + lc))


def _geometric_tables(L: int, tau: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """G_l = sum_{j<=l} tau^j, H_l = sum_{j<=l} j tau^j, K_l = sum_{i<=l} G_i, l = 0..L."""
    j = np.arange(L + 1, dtype=float)
    with np.errstate(under="ignore"):
        pw = np.power(tau, j)
    G = np.cumsum(pw)
    H = np.cumsum(j * pw)
    K = np.cumsum(G)
    return G, H, K


def _log_prefactor_complex(z: complex, tau: float) -> float:
    q = (abs(z) ** 2 - tau * (z * z).real) / (1.0 - tau * tau)
    return -math.log(math.pi) - 0.5 * math.log1p(-tau * tau) - q


# --- eGinUE building blocks ---------------------------------------------------


def log_rho_eginue(order: int, z, tau: float) -> float:
    """log of the eGinUE density with ``order`` Hermite terms (``-inf`` for order <= 0)."""
    t = _check_tau(tau)
    z = _z(z)
    if order <= 0:
        return -math.inf
    lw = log_hermite_weights(order - 1, z, t)
    return _log_prefactor_complex(z, t) + float(logsumexp(lw))


def rho_eginue(order: int, z, tau: float) -> float:
    return math.exp(log_rho_eginue(order, z, tau))


def density_eginue(spec: EnsembleSpec, z) -> float:
    """Mean density of eigenvalues of the complex elliptic ensemble at z."""
    if spec.kind is not Kind.COMPLEX:
        raise DomainError("density_eginue needs a complex (eginue) ensemble")
    return rho_eginue(spec.n, z, spec.tau)


def log_r_n(order: int, z, tau: float) -> float:
    t = _check_tau(tau)
    z = _z(z)
    if order <= 0:
        return -math.inf
    lw = log_hermite_weights(order, z, t)
    return _log_prefactor_complex(z, t) + _logsum(lw, np.arange(order + 1, dtype=float))


def r_n(order: int, z, tau: float) -> float:
    """``R_order``: the k-weighted Hermite sum with the density prefactor; 0 for order <= 0."""
    return math.exp(log_r_n(order, z, tau))


def _overlap_weights_complex(n: int, tau: float) -> np.ndarray:
    # rho_N + (1-tau^2)[rho_{N-1} + (N-2) rho_{N-2} - R_{N-3}] collapses to
    # weights 1 + (1-tau^2)(N-1-k) on the terms k = 0..N-1
    k = np.arange(n, dtype=float)
    return 1.0 + (1.0 - tau * tau) * (n - 1 - k)


def log_overlap_eginue(n: int, z, tau: float) -> float:
    t = _check_tau(tau)
    z = _z(z)
    lw = log_hermite_weights(n - 1, z, t)
    return _log_prefactor_complex(z, t) + _logsum(lw, _overlap_weights_complex(n, t))


def overlap_eginue(spec: EnsembleSpec, z) -> float:
    """Mean self-overlap density O_N(z) for the complex elliptic ensemble."""
    if spec.kind is not Kind.COMPLEX:
        raise DomainError("overlap_eginue needs a complex (eginue) ensemble")
    return math.exp(log_overlap_eginue(spec.n, z, spec.tau))


# --- eGinOE building blocks ---------------------------------------------------


def log_p_n(order: int, z, tau: float) -> float:
    t = _check_tau(tau)
    z = _z(z)
    if order < 0:
        return -math.inf
    lw = log_hermite_weights(order, z, t)
    G, _, _ = _geometric_tables(order, t)
    # P_n = sum_m t_m sum_{j=0}^{n-m} tau^j
    return _logsum(lw, G[::-1])


def p_n(order: int, z, tau: float) -> float:
    """``P_order`` by the Christoffel-Darboux double sum; 0 for order < 0."""
    return math.exp(log_p_n(order, z, tau))


def log_t_n(order: int, z, tau: float) -> float:
    t = _check_tau(tau)
    z = _z(z)
    if order <= 0:
        return -math.inf
    lw = log_hermite_weights(order, z, t)
    G, H, _ = _geometric_tables(order, t)
    m = np.arange(order + 1, dtype=float)
    # T_n = sum_m t_m sum_{j=0}^{n-m} (m+j) tau^j
    return _logsum(lw, m * G[::-1] + H[::-1])


def t_n(order: int, z, tau: float) -> float:
    """``T_order`` by the k-weighted double sum; 0 for order <= 0."""
    return math.exp(log_t_n(order, z, tau))


def _difference_form(order: int, z: complex, tau: float, weighted: bool) -> float:
    if order < 0:
        return 0.0
    if not 0.0 < tau < 1.0:
        raise DomainError(f"difference form needs 0 < tau < 1, got {tau}")
    _require_offaxis(z)
    r = math.sqrt(tau)
    he = hermite_he_scaled(order + 1, z / r)
    he_bar = hermite_he_scaled(order + 1, z.conjugate() / r)
    total = ScaledValue(0.0)
    lt = math.log(tau)
    for k in range(order + 1):
        if weighted and k == 0:
            continue
        c = ScaledValue.from_log((k + 0.5) * lt - math.lgamma(k + 1))
        if weighted:
            c = c * k
        total = total + c * (he_bar[k + 1] * he[k] - he[k + 1] * he_bar[k])
    return (total / (z.conjugate() - z)).value.real


def p_n_difference(order: int, z, tau: float) -> float:
    """``P_order`` from the antisymmetric Hermite-difference form (needs tau > 0, y != 0)."""
    return _difference_form(order, _z(z), tau, weighted=False)


def t_n_difference(order: int, z, tau: float) -> float:
    """``T_order`` from the antisymmetric Hermite-difference form (needs tau > 0, y != 0)."""
    return _difference_form(order, _z(z), tau, weighted=True)


def _erfc_arg(y: float, tau: float) -> float:
    return math.sqrt(2.0 / (1.0 - tau * tau)) * abs(y)


def log_density_eginoe(n: int, z, tau: float) -> float:
    t = _check_tau(tau)
    z = _z(z)
    _require_offaxis(z)
    x, y = z.real, z.imag
    return (
        0.5 * math.log(2.0 / math.pi)
        - math.log1p(t)
        + math.log(abs(y))
        + (y * y - x * x) / (1.0 + t)
        + log_erfc(_erfc_arg(y, t))
        + log_p_n(n - 2, z, t)
    )


def density_eginoe_complex(spec: EnsembleSpec, z) -> float:
    """Mean density of complex eigenvalues of the real elliptic ensemble, even in y."""
    if spec.kind is not Kind.REAL:
        raise DomainError("density_eginoe_complex needs a real (eginoe) ensemble")
    return math.exp(log_density_eginoe(spec.n, z, spec.tau))


def _overlap_weights_real(n: int, tau: float) -> np.ndarray:
    # P_{N-2} + (1-tau^2)(P_{N-3} + (N-3) P_{N-4} - T_{N-4}) as weights on t_m, m = 0..N-2;
    # (N-3)P_{L} - T_{L} with L = N-4 has weights sum_{j<=L-m} (L+1-m-j) tau^j = K_{L-m}
    L = n - 2
    G, _, K = _geometric_tables(max(L, 0), tau)
    w = G[::-1].copy()
    c = 1.0 - tau * tau
    if n - 3 >= 0:
        w[: n - 2] += c * G[: n - 2][::-1]
    if n - 4 >= 0:
        w[: n - 3] += c * K[: n - 3][::-1]
    return w


def log_bracket_eginoe(y: float, tau: float) -> float:
    """log of ``1 + sqrt(pi(1-tau^2)/2) erfcx(u)/(2|y|)`` with ``u = sqrt(2/(1-tau^2))|y|``."""
    c = 1.0 - tau * tau
    return math.log1p(math.sqrt(math.pi * c / 2.0) * erfcx(_erfc_arg(y, tau)) / (2.0 * abs(y)))


def log_overlap_eginoe(n: int, z, tau: float) -> float:
    t = _check_tau(tau)
    z = _z(z)
    _require_offaxis(z)
    x, y = z.real, z.imag
    lw = log_hermite_weights(n - 2, z, t)
    return (
        -math.log(math.pi)
        + 0.5 * (math.log1p(-t) - math.log1p(t))
        - x * x / (1.0 + t)
        - y * y / (1.0 - t)
        + log_bracket_eginoe(y, t)
        + _logsum(lw, _overlap_weights_real(n, t))
    )


def overlap_eginoe(spec: EnsembleSpec, z) -> float:
    """Mean self-overlap density O_N(z) at a complex point of the real elliptic ensemble."""
    if spec.kind is not Kind.REAL:
        raise DomainError("overlap_eginoe needs a real (eginoe) ensemble")
    return math.exp(log_overlap_eginoe(spec.n, z, spec.tau))


# --- dispatch -------------------------------------------------------------------


def log_density(spec: EnsembleSpec, z) -> float:
    if spec.is_real:
        return log_density_eginoe(spec.n, z, spec.tau)
    return log_rho_eginue(spec.n, z, spec.tau)


def log_overlap(spec: EnsembleSpec, z) -> float:
    if spec.is_real:
        return log_overlap_eginoe(spec.n, z, spec.tau)
    return log_overlap_eginue(spec.n, z, spec.tau)


def density(spec: EnsembleSpec, z) -> float:
    return math.exp(log_density(spec, z))


def overlap(spec: EnsembleSpec, z) -> float:
    return math.exp(log_overlap(spec, z))


def evaluate(spec: EnsembleSpec, z) -> FiniteNResult:
    """Density, mean self-overlap and conditional overlap at one point."""
    ld = log_density(spec, z)
    lo = log_overlap(spec, z)
    d, o = math.exp(ld), math.exp(lo)
    if d <= DENSITY_FLOOR:
        return FiniteNResult(d, o, None, FLAG_UNDERFLOW, ld, lo)
    return FiniteNResult(d, o, math.exp(lo - ld), None, ld, lo)


def conditional_mean(spec: EnsembleSpec, z) -> float | None:
    """``overlap(z) / density(z)``; None when the density is below the underflow floor."""
    return evaluate(spec, z).conditional


def window_conditional(spec: EnsembleSpec, z, hx: float, hy: float, nodes: int = 12) -> float:
    """Ratio of box integrals of overlap and density over ``|dx| <= hx, |dy| <= hy``.

    This is the exact target of a tolerance-window Monte Carlo estimate
    (the mean of O_nn over eigenvalues that fall in the box).
    """
    c = ComplexPoint.of(z)
    if spec.is_real and (c.y - hy) * (c.y + hy) <= 0:
        raise DomainError("window must not touch the real axis for the eginoe ensemble")
    u, w = np.polynomial.legendre.leggauss(nodes)
    lo, ld = [], []
    for i in range(nodes):
        for j in range(nodes):
            p = ComplexPoint(c.x + hx * u[i], c.y + hy * u[j])
            lw = math.log(w[i] * w[j])
            lo.append(lw + log_overlap(spec, p))
            ld.append(lw + log_density(spec, p))
    return math.exp(float(logsumexp(lo) - logsumexp(ld)))
