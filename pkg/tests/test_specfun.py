import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from overlaps.specfun import (
    DomainError,
    ScaledValue,
    erfc,
    erfcx,
    hermite_he,
    hermite_he_scaled,
    hermite_pair_sequence,
    log_erfc,
    log_hermite_weights,
    theta_ratio,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)


def mp_he(k, x):
    return complex(mp.hermite(k, mp.mpc(x) / mp.sqrt(2)) * mp.power(2, -mp.mpf(k) / 2))


# --- ScaledValue ---------------------------------------------------------------------


@given(re=finite, im=finite, s=st.floats(-700, 700))
def test_scaled_value_band(re, im, s):
    v = ScaledValue(complex(re, im), s)
    if v.mantissa == 0:
        assert v.log_scale == 0.0
    else:
        assert 1e-8 <= abs(v.mantissa) <= 1e8


@given(a=st.floats(1e-5, 1e5), b=st.floats(1e-5, 1e5), sa=st.floats(-300, 300), sb=st.floats(-300, 300))
def test_scaled_value_product_adds_logs(a, b, sa, sb):
    p = ScaledValue(a, sa) * ScaledValue(b, sb)
    assert p.log_abs() == pytest.approx(math.log(a) + sa + math.log(b) + sb, rel=1e-12, abs=1e-9)


def test_scaled_value_beyond_double_range():
    big = ScaledValue(1.0, 2000.0)
    assert (big * big).log_abs() == pytest.approx(4000.0)
    assert (big / big).value == pytest.approx(1.0)
    assert ScaledValue(0.0, 17.0).log_scale == 0.0
    assert (big + ScaledValue(1.0)).log_abs() == pytest.approx(2000.0)


@given(a=st.floats(-1e3, 1e3), b=st.floats(-1e3, 1e3))
def test_scaled_value_addition(a, b):
    assert (ScaledValue(a) + ScaledValue(b)).value == pytest.approx(a + b, rel=1e-12, abs=1e-9)


# --- Hermite ---------------------------------------------------------------------------


@pytest.mark.parametrize("k", [0, 1, 2, 5, 12, 30])
@pytest.mark.parametrize("x", [0.0, 0.7, -2.5 + 0.3j, 4.0j])
def test_hermite_against_mpmath(k, x):
    assert hermite_he(k, x) == pytest.approx(mp_he(k, x), rel=1e-12, abs=1e-12)


def test_hermite_closed_forms():
    x = 1.3 - 0.4j
    assert hermite_he(2, x) == pytest.approx(x * x - 1)
    assert hermite_he(3, x) == pytest.approx(x**3 - 3 * x)


def test_hermite_scaled_high_order():
    K, x = 400, 25.0 + 3.0j
    seq = hermite_he_scaled(K, x)
    ref = mp.hermite(K, mp.mpc(x) / mp.sqrt(2)) * mp.power(2, -mp.mpf(K) / 2)
    assert seq[K].log_abs() == pytest.approx(float(mp.log(abs(ref))), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(K=st.integers(0, 40), tau=st.floats(0.01, 1.0), x=st.floats(-5, 5), y=st.floats(-5, 5))
def test_pair_sequence_matches_log_weights(K, tau, x, y):
    z = complex(x, y)
    terms = hermite_pair_sequence(K, z, tau)
    logs = log_hermite_weights(K, z, tau)
    for t, lw in zip(terms, logs):
        assert abs(t.mantissa.imag) <= 1e-8 * abs(t.mantissa) + 1e-300
        if t.mantissa != 0:
            assert t.log_abs() == pytest.approx(lw, abs=1e-9, rel=1e-10)


def test_log_weights_tau_zero_limit():
    z = 1.2 + 0.5j
    got = log_hermite_weights(6, z, 0.0)
    ref = [2 * k * math.log(abs(z)) - math.lgamma(k + 1) for k in range(7)]
    assert got == pytest.approx(ref, rel=1e-14)


def test_log_weights_large_order_finite():
    lw = log_hermite_weights(5000, 40 + 10j, 0.5)
    assert np.all(np.isfinite(lw))


@pytest.mark.parametrize("tau", [-0.1, 1.1])
def test_log_weights_domain(tau):
    with pytest.raises(DomainError):
        log_hermite_weights(3, 1j, tau)


def test_pair_sequence_rejects_tau_zero():
    with pytest.raises(DomainError):
        hermite_pair_sequence(3, 1j, 0.0)


# --- incomplete gamma ratio ------------------------------------------------------------


@pytest.mark.parametrize("N,M", [(1, 0), (10, 0), (10, 1), (200, 2), (5000, 0)])
@pytest.mark.parametrize("x", [0.1, 0.9, 1.0, 1.1, 3.0])
def test_theta_ratio_against_mpmath(N, M, x):
    a = N - M + 1
    ref = float(mp.gammainc(a, N * x, mp.inf, regularized=True))
    assert theta_ratio(N, M, x) == pytest.approx(ref, rel=1e-10, abs=1e-300)


def test_theta_ratio_negative_branch():
    N, M, x = 8, 1, -0.2
    ref = math.exp(-N * x) * sum((N * x) ** k / math.factorial(k) for k in range(N - M + 1))
    assert theta_ratio(N, M, x) == pytest.approx(ref, rel=1e-13)


@settings(max_examples=50)
@given(N=st.integers(1, 500), x=st.floats(0, 5))
def test_theta_ratio_bounded_and_monotone(N, x):
    v = theta_ratio(N, 0, x)
    assert 0.0 <= v <= 1.0
    assert theta_ratio(N, 0, x + 0.01) <= v + 1e-15


def test_theta_ratio_bad_order():
    with pytest.raises(DomainError):
        theta_ratio(3, 5, 0.5)


# --- erfc helpers ------------------------------------------------------------------------


@pytest.mark.parametrize("x", [-3.0, 0.0, 0.5, 4.0, 30.0])
def test_erfc_family(x):
    assert erfc(x) == pytest.approx(float(mp.erfc(x)), rel=1e-13, abs=1e-300)
    assert erfcx(x) == pytest.approx(float(mp.exp(x * x) * mp.erfc(x)), rel=1e-13)
    assert log_erfc(x) == pytest.approx(float(mp.log(mp.erfc(x))), rel=1e-13, abs=1e-15)


def test_log_erfc_deep_tail():
    x = 100.0
    assert erfc(x) == 0.0
    assert log_erfc(x) == pytest.approx(float(mp.log(mp.erfc(x))), rel=1e-12)
