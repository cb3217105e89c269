import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from overlaps.ensembles import EnsembleSpec, Kind
from overlaps.sampling import (
    SeededStream,
    chunk_size,
    eginoe_batch,
    eginue_batch,
    iter_samples,
    log_jpdf,
    sample_eginoe,
    sample_eginue,
)
from overlaps.specfun import DomainError


def test_same_seed_same_matrices():
    spec = EnsembleSpec(Kind.REAL, 6, 0.3)
    a = sample_eginoe(spec, SeededStream(11, 2)).entries
    b = sample_eginoe(spec, SeededStream(11, 2)).entries
    assert np.array_equal(a, b)
    c = sample_eginoe(spec, SeededStream(11, 3)).entries
    assert not np.array_equal(a, c)


def test_sampler_rejects_wrong_kind():
    with pytest.raises(DomainError):
        sample_eginue(EnsembleSpec(Kind.REAL, 3, 0.1), SeededStream(0))
    with pytest.raises(DomainError):
        sample_eginoe(EnsembleSpec(Kind.COMPLEX, 3, 0.1), SeededStream(0))


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5])
def test_bad_seed(seed):
    with pytest.raises(DomainError):
        SeededStream(seed)


@settings(max_examples=15, deadline=None)
@given(count=st.integers(1, 300), cut=st.integers(0, 300))
def test_prefix_stability(count, cut):
    # the first k matrices of a stream never depend on how many are drawn in total
    cut = min(cut, count)
    spec = EnsembleSpec(Kind.COMPLEX, 12, 0.5)
    s = SeededStream(5, 1)
    full = np.concatenate([b for _, b in iter_samples(spec, s, count)])
    part = [b for _, b in iter_samples(spec, s, cut)]
    if cut:
        assert np.array_equal(np.concatenate(part), full[:cut])
    assert len(full) == count


@pytest.mark.parametrize("n", [1, 4, 10, 50, 500, 1000])
def test_chunk_size_range(n):
    assert 1 <= chunk_size(n) <= 4096


@pytest.mark.parametrize("tau", [0.0, 0.5, 0.9])
def test_real_structure(tau):
    rng = SeededStream(3).generator()
    x = eginoe_batch(rng, 5, tau, 20000)
    assert x.dtype == np.float64
    assert np.mean(x[:, 0, 1] * x[:, 1, 0]) == pytest.approx(tau, abs=0.04)
    assert np.mean(x[:, 2, 2] ** 2) == pytest.approx(1 + tau, abs=0.05)
    assert np.mean(x[:, 0, 3] ** 2) == pytest.approx(1.0, abs=0.04)


@pytest.mark.parametrize("tau", [0.0, 0.5, 0.9])
def test_complex_structure(tau):
    rng = SeededStream(4).generator()
    x = eginue_batch(rng, 5, tau, 20000)
    assert np.mean(x[:, 0, 1] * x[:, 1, 0]).real == pytest.approx(tau, abs=0.04)
    assert abs(np.mean(x[:, 0, 1] * x[:, 1, 0]).imag) < 0.04
    assert np.mean(np.abs(x[:, 2, 2]) ** 2) == pytest.approx(1.0, abs=0.04)
    assert abs(np.mean(x[:, 2, 2] ** 2) - tau) < 0.04


def test_hermitian_limit():
    x = eginue_batch(SeededStream(9).generator(), 6, 1.0, 3)
    assert np.allclose(x, np.conj(np.swapaxes(x, -1, -2)))
    y = eginoe_batch(SeededStream(9).generator(), 6, 1.0, 3)
    assert np.allclose(y, np.swapaxes(y, -1, -2))


@pytest.mark.parametrize("tau", [0.0, 0.3, 0.8])
def test_log_jpdf_real_matches_gaussian(tau):
    # 2x2 real: entries (x11, x12, x21, x22) with var(diag) = 1+tau and cov(x12, x21) = tau
    cov = np.diag([1 + tau, 1.0, 1.0, 1 + tau])
    cov[1, 2] = cov[2, 1] = tau
    mvn = stats.multivariate_normal(np.zeros(4), cov)
    rng = np.random.default_rng(0)
    for _ in range(5):
        v = rng.standard_normal(4)
        assert log_jpdf(v.reshape(2, 2), "eginoe", tau) == pytest.approx(mvn.logpdf(v), rel=1e-12)


@pytest.mark.parametrize("tau", [0.0, 0.3, 0.8])
def test_log_jpdf_complex_one_by_one(tau):
    z = 0.4 - 1.1j
    ref = stats.norm(0, math.sqrt((1 + tau) / 2)).logpdf(z.real) + stats.norm(0, math.sqrt((1 - tau) / 2)).logpdf(z.imag)
    assert log_jpdf(np.array([[z]]), "eginue", tau) == pytest.approx(ref, rel=1e-12)


def test_log_jpdf_domain():
    with pytest.raises(DomainError):
        log_jpdf(np.eye(2), "eginoe", 1.0)
