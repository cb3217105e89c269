"""Worked examples with closed-form or independently computed answers."""
import json
import math

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate, special

import oracles
from overlaps import asymptotics as asy
from overlaps import cli
from overlaps import finite_n as fn
from overlaps.ensembles import ComplexPoint, EnsembleSpec, Kind, depletion_point, snh_point
from overlaps.io import read_csv
from overlaps.sampling import SeededStream, eginoe_batch, eginue_batch
from overlaps.specfun import erfc, hermite_he, hermite_pair_sequence, theta_ratio
from overlaps.spectra import MCConfig, conditional_overlap_estimate, density_histogram

# --- special functions ----------------------------------------------------------------------


def test_hermite_small_cases():
    assert hermite_he(0, 3.7 - 2j) == 1
    assert hermite_he(3, 2.0) == 2.0
    assert hermite_he(2, 1j) == -2


def test_pair_sequence_small_cases():
    assert [t.value for t in hermite_pair_sequence(0, 0.3 + 2j, 0.4)] == [1]
    assert hermite_pair_sequence(1, 1j, 1.0)[1].value == pytest.approx(1.0)
    z, tau = 2 + 1j, 0.5
    s = mp.sqrt(tau)
    for k, t in enumerate(hermite_pair_sequence(5, z, tau)):
        ref = tau**k / mp.factorial(k) * abs(mp.hermite(k, mp.mpc(z) / s / mp.sqrt(2)) * mp.power(2, -k / 2.0)) ** 2
        assert t.value.real == pytest.approx(float(ref), rel=1e-12)


def test_theta_ratio_cases():
    assert theta_ratio(5, 1, 0.0) == 1.0
    assert theta_ratio(50, 0, 10.0) < 1e-100
    ref = math.exp(-5) * sum(5**k / math.factorial(k) for k in range(10))
    assert theta_ratio(10, 1, 0.5) == pytest.approx(ref, rel=1e-13)


def test_erfc_cases():
    assert erfc(0.0) == 1.0
    assert erfc(1.0) == pytest.approx(0.157299207050285, rel=1e-14)
    for x in np.linspace(-3, 3, 13):
        assert erfc(x) + special.erf(x) == pytest.approx(1.0, abs=1e-15)


# --- finite N ---------------------------------------------------------------------------------


def test_density_single_term():
    assert fn.rho_eginue(1, 0.0, 1e-14) == pytest.approx(1 / math.pi, rel=1e-12)


def test_density_ginue_corner():
    z = 1 + 0.5j
    a2 = abs(z) ** 2
    ref = math.exp(-a2) / math.pi * (1 + a2 + a2**2 / 2)
    assert fn.density(EnsembleSpec(Kind.COMPLEX, 3, 1e-12), z) == pytest.approx(ref, rel=1e-6)


def test_density_mass_n4():
    spec = EnsembleSpec(Kind.COMPLEX, 4, 0.3)
    lim = 8.0
    val = integrate.dblquad(lambda y, x: fn.density(spec, complex(x, y)), -lim, lim, -lim, lim, epsrel=1e-9)[0]
    assert val == pytest.approx(4.0, abs=1e-6)


def test_p_t_r_cases():
    assert fn.p_n(0, 0.3 + 0.9j, 0.7) == pytest.approx(1.0)
    assert fn.p_n(3, 1 + 1j, 0.5) == pytest.approx(fn.p_n_difference(3, 1 + 1j, 0.5), rel=1e-10)
    assert fn.t_n(0, 0.3 + 0.9j, 0.7) == 0.0
    assert fn.t_n(4, 0.5 + 0.5j, 0.4) == pytest.approx(fn.t_n_difference(4, 0.5 + 0.5j, 0.4), rel=1e-10)
    assert fn.r_n(0, 1 + 1j, 0.5) == 0.0
    assert fn.r_n(-1, 1 + 1j, 0.5) == 0.0
    assert fn.r_n(3, 1 + 1j, 0.5) == pytest.approx(float(oracles.r_sum(3, 1 + 1j, 0.5)), rel=1e-10)


@pytest.mark.parametrize("n", [1, 5, 20])
@pytest.mark.parametrize("z", [0.2 + 0.4j, 2 + 1j, -1 + 3j])
def test_t_bounded_by_n_p(n, z):
    assert fn.t_n(n, z, 0.6) <= n * fn.p_n(n, z, 0.6) * (1 + 1e-12)


def test_real_density_n2():
    tau = 0.5
    ref = math.sqrt(2 / math.pi) * (2 / 3) * math.exp(1 / 1.5) * special.erfc(math.sqrt(8 / 3))
    spec = EnsembleSpec(Kind.REAL, 2, tau)
    assert fn.density(spec, 1j) == pytest.approx(ref, rel=1e-13)
    for z in (0.4 + 0.7j, 0.4 - 0.7j, -0.4 + 0.7j):
        assert fn.density(spec, z) == pytest.approx(fn.density(spec, 0.4 + 0.7j), rel=1e-14)


def test_ginue_overlap_n2_origin():
    assert fn.overlap(EnsembleSpec(Kind.COMPLEX, 2, 0.0), 0.0) == pytest.approx(2 / math.pi, rel=1e-14)


@pytest.mark.parametrize("kind", list(Kind))
@pytest.mark.parametrize("tau", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("n", [4, 10, 20])
def test_overlap_dominates_density(kind, tau, n):
    for x in np.linspace(-1.5, 1.5, 4) * math.sqrt(n):
        for y in np.linspace(0.1, 1.2, 4) * math.sqrt(n) * (1 - tau):
            r = fn.evaluate(EnsembleSpec(kind, n, tau), complex(x, y))
            assert r.overlap >= r.density
            if r.conditional is not None:
                assert r.conditional >= 1 - 1e-9


def test_real_overlap_tau_limit():
    for z in (0.5 + 0.5j, 2 + 0.1j):
        a = fn.overlap(EnsembleSpec(Kind.REAL, 10, 1e-6), z)
        b = fn.overlap(EnsembleSpec(Kind.REAL, 10, 1e-10), z)
        assert abs(a - b) / b < 1e-4


def test_snh_centre_ratio():
    n, tau = 500, 0.25
    for kind in Kind:
        got = fn.conditional_mean(EnsembleSpec(kind, n, tau), snh_point(n, 0.0, 0.3 * (1 - tau))) / n
        assert got == pytest.approx(asy.snh_bulk_conditional(tau, 0.0, 0.3 * (1 - tau)), rel=0.02)
    assert asy.snh_bulk_conditional(tau, 0, 0) == pytest.approx(1 - tau**2)


# --- asymptotics ---------------------------------------------------------------------------


def test_snh_edges():
    assert asy.snh_bulk_overlap(0.3, 1.3, 0.0) == 0.0
    for wx, wy in ((0.2, 0.5), (0.7, -0.1)):
        assert asy.snh_bulk_overlap(0.0, wx, wy) == pytest.approx((1 - wx**2 - wy**2) / math.pi)
    assert asy.snh_depletion_overlap(0.25, 1.25, 0.5) == 0.0
    assert asy.snh_depletion_overlap(0.25, 1.3, 0.5) == 0.0
    # xi -> infinity: bracket -> 1
    assert asy.snh_depletion_overlap(0.25, 0.5, 1e4) == pytest.approx(asy.snh_bulk_overlap(0.25, 0.5, 0.0), rel=1e-8)


def test_depletion_reference_point():
    tau, d, xi = 0.25, 0.0, 0.5
    c = 2 / (1 - tau**2)
    ov = (1 + math.sqrt(math.pi * (1 - tau**2) / 2) * math.exp(c * xi**2) / (2 * xi) * special.erfc(math.sqrt(c) * xi))
    de = math.sqrt(2 / math.pi) / (1 - tau**2) ** 1.5 * xi * math.exp(c * xi**2) * special.erfc(math.sqrt(c) * xi)
    assert asy.snh_depletion_conditional(tau, d, xi) == pytest.approx(ov / math.pi / de, rel=1e-12)


def test_wnh_cases():
    for kind, f in (("eginue", asy.wnh_bulk_overlap_eginue), ("eginoe", asy.wnh_bulk_overlap_eginoe)):
        assert f(1.0, 2.0, 0.7) == 0.0
        assert f(1.3, 0.4, 0.9) == pytest.approx(f(1.3, 0.4, -0.9), rel=1e-12)
        assert asy.wnh_density(kind, 1.3, 0.4, 0.9) == pytest.approx(asy.wnh_density(kind, 1.3, 0.4, -0.9), rel=1e-12)
        assert asy.wnh_density(kind, 1.3, 0.4, 0.9) >= 0
    q = integrate.quad(lambda u: math.exp(-u * u / 2) * (1 + math.pi**2 - u * u), 0, math.pi, epsabs=1e-14)[0]
    assert asy.wnh_bulk_overlap_eginue(1.0, 0.0, 0.0) == pytest.approx(math.sqrt(2) / math.pi**1.5 * q, rel=1e-12)
    q = integrate.quad(lambda u: math.exp(-u * u / 2), 0, math.pi, epsabs=1e-14)[0]
    assert asy.wnh_density("eginue", 1.0, 0.0, 0.0) == pytest.approx(math.sqrt(2) / math.pi**1.5 * q, rel=1e-12)


def test_oracle_cases():
    o = asy.integral_rep_oracle("P", 6, 1 + 0.8j, 0.5)
    assert o.value == pytest.approx(fn.p_n(6, 1 + 0.8j, 0.5), rel=1e-4)
    o = asy.integral_rep_oracle("density", 5, 0.5 + 0.5j, 0.3)
    assert o.value == pytest.approx(fn.rho_eginue(5, 0.5 + 0.5j, 0.3), rel=1e-4)
    assert asy.integral_rep_oracle("R", 0, 0.5 + 0.5j, 0.3).value == pytest.approx(0.0, abs=1e-12)


# --- sampling and spectra ----------------------------------------------------------------------


def test_hermitian_limit_exact():
    x = eginue_batch(SeededStream(1).generator(), 5, 1.0, 4)
    assert np.array_equal(x, np.conj(np.swapaxes(x, -1, -2)))
    y = eginoe_batch(SeededStream(1).generator(), 5, 1.0, 4)
    assert np.array_equal(y, np.swapaxes(y, -1, -2))


@pytest.mark.slow
def test_box_fraction_matches_density():
    spec = EnsembleSpec(Kind.COMPLEX, 8, 0.3)
    xe, ye = np.array([0.5, 1.0]), np.array([0.5, 1.0])
    h = density_histogram(spec, xe, ye, 1_000_000, seed=11)
    frac = h.counts[0, 0] / h.samples
    mass = integrate.dblquad(lambda y, x: fn.density(spec, complex(x, y)), 0.5, 1.0, 0.5, 1.0, epsrel=1e-10)[0]
    assert abs(frac - mass) < 3 * math.sqrt(h.counts[0, 0]) / h.samples


def test_histogram_covers_all_eigenvalues():
    spec = EnsembleSpec(Kind.COMPLEX, 6, 0.5)
    h = density_histogram(spec, np.linspace(-50, 50, 5), np.linspace(-50, 50, 5), 500, seed=2)
    assert h.counts.sum() == 500 * 6 and h.outside == 0


def test_histogram_pointwise_n8():
    spec = EnsembleSpec(Kind.COMPLEX, 8, 0.3)
    xe, ye = np.linspace(-2, 2, 5), np.linspace(-1.5, 1.5, 4)
    h = density_histogram(spec, xe, ye, 200_000, seed=3)
    d, se = h.density(), h.std_error()
    for i in range(len(xe) - 1):
        for j in range(len(ye) - 1):
            box = integrate.dblquad(lambda y, x: fn.density(spec, complex(x, y)), xe[i], xe[i + 1], ye[j], ye[j + 1],
                                    epsrel=1e-8)[0]
            box /= (xe[i + 1] - xe[i]) * (ye[j + 1] - ye[j])
            assert abs(d[i, j] - box) < 3 * se[i, j]


@pytest.mark.slow
def test_depletion_dip_profile():
    # complex-eigenvalue density across the depletion strip at N=500 against the strip limit
    n, tau = 500, 0.25
    spec = EnsembleSpec(Kind.REAL, n, tau)
    ye = np.array([0.0, 0.25, 0.5, 1.0, 1.5, 2.5])
    xe = np.array([-0.5, 0.5]) * math.sqrt(n)
    h = density_histogram(spec, xe, ye, 400, seed=4)
    width = xe[1] - xe[0]
    for j in range(len(ye) - 1):
        # strip density in z units: limit profile averaged over the y-bin
        mean = integrate.quad(lambda y: asy.snh_depletion_density(tau, 0.0, y), ye[j], ye[j + 1])[0]
        mean /= ye[j + 1] - ye[j]
        c = h.counts[0, j]
        got = c / h.samples / width / (ye[j + 1] - ye[j])
        se = math.sqrt(c) / h.samples / width / (ye[j + 1] - ye[j])
        assert abs(got - mean) < 3 * se + 0.01 * mean


@pytest.mark.slow
def test_ginue_corner_mc():
    spec = EnsembleSpec(Kind.COMPLEX, 10, 1e-12)
    h = 1 / math.sqrt(10)
    est = conditional_overlap_estimate(spec, [0.0], MCConfig(budget=1_000_000, seed=8, hx=h, hy=h)).estimates[0]
    ref = fn.window_conditional(EnsembleSpec(Kind.COMPLEX, 10, 0.0), 0.0, h, h)
    assert abs(est.mean - ref) < 3 * est.std_error


def test_conjugate_targets_agree():
    spec = EnsembleSpec(Kind.COMPLEX, 6, 0.4)
    res = conditional_overlap_estimate(spec, [0.5 + 0.8j, 0.5 - 0.8j], MCConfig(budget=100_000, seed=6, hx=0.2, hy=0.2))
    a, b = res.estimates
    assert abs(a.mean - b.mean) < 4 * math.hypot(a.std_error, b.std_error)


# --- command line ---------------------------------------------------------------------------------


def test_cli_eval_columns(tmp_path):
    out = tmp_path / "e.csv"
    assert cli.main(["eval", "--ensemble", "eginue", "--n", "10", "--tau", "0.5", "--z", "0,1.0", "--out", str(out)]) == 0
    (row,), _ = read_csv(out)
    r = fn.evaluate(EnsembleSpec(Kind.COMPLEX, 10, 0.5), 1j)
    assert (row["density"], row["overlap"], row["conditional"]) == (r.density, r.overlap, r.conditional)


def test_cli_snh_centre(capsys):
    assert cli.main(["eval", "--regime", "snh-bulk", "--tau", "0.25", "--w", "0,0", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["rows"][0]["overlap"] == pytest.approx(1 / math.pi, abs=1e-15)


def test_cli_axis_message(capsys):
    assert cli.main(["eval", "--ensemble", "eginoe", "--n", "10", "--tau", "0.5", "--z", "0,0"]) == 2
    assert "y != 0" in capsys.readouterr().err


def test_cli_figures_2_and_5(tmp_path, capsys):
    assert cli.main(["figure", "--id", "2", "--budget", "0", "--out", str(tmp_path)]) == 0
    rows, _ = read_csv(tmp_path / "fig2_right.csv")
    assert {r["ensemble"] for r in rows} == {"eginue", "eginoe"}
    assert cli.main(["figure", "--id", "5", "--tau", "0.25,0.5,0.75", "--budget", "0", "--out", str(tmp_path)]) == 0
    rows, _ = read_csv(tmp_path / "fig5_left.csv")
    assert sorted({r["tau"] for r in rows}) == [0.25, 0.5, 0.75]


def test_cli_regimes_table(capsys):
    assert cli.main(["compare", "--suite", "regimes"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["passed"] and len(rep["criteria"][0]["checks"]) > 10
