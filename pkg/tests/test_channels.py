"""Channel laws of both hops and their samplers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from helpers import ks_distance, oracle, rel_err, tabulated_cdf
from hybridfso.channels import (MODERATE, STRONG, RfParams, TurbulenceParams, fso_snr_cdf,
                                gg_params_from_rytov, max_user_cdf, max_user_pdf, rayleigh_snr_cdf,
                                rayleigh_snr_pdf, sample_fso_intensity, sample_fso_snr,
                                sample_max_user_snr, sample_rf_snr)
from hybridfso.errors import DivergenceError, DomainError

REGIMES = pytest.mark.parametrize("t", [MODERATE, STRONG], ids=["moderate", "strong"])


# -- Rytov parameterisation ----------------------------------------------------------

@pytest.mark.parametrize("s2", ["1.0", "0.25"])
def test_rytov_formulas(s2):
    a, b = gg_params_from_rytov(float(s2))
    assert rel_err(a, oracle(f"rytov_{s2}_alpha")) <= 1e-12
    assert rel_err(b, oracle(f"rytov_{s2}_beta")) <= 1e-12


def test_rytov_ordering_and_limits():
    a, b = gg_params_from_rytov(0.25)
    assert a > b
    a_small, b_small = gg_params_from_rytov(1e-8)
    assert a_small > 1e7 and b_small > 1e7
    with pytest.raises(DivergenceError):
        gg_params_from_rytov(0.0)
    with pytest.raises(DomainError):
        gg_params_from_rytov(-0.1)


def test_turbulence_params_validation():
    t = TurbulenceParams.from_rytov(1.0, xi=2.0)
    assert (t.alpha, t.beta) == gg_params_from_rytov(1.0)
    with pytest.raises(DomainError):
        TurbulenceParams(4.0, 1.9, 1.0, rytov_variance=1.0)
    for bad in (dict(alpha=0.0), dict(beta=-1.0), dict(xi=float("inf")), dict(kappa=0.0)):
        with pytest.raises(DomainError):
            TurbulenceParams(**{**dict(alpha=4.0, beta=1.9, xi=1.0), **bad})


# -- Rayleigh and the best-of-N access hop ------------------------------------------------

def test_rayleigh_examples():
    p = RfParams(3.0)
    assert rayleigh_snr_cdf(3.0, p) == pytest.approx(1 - math.exp(-1), rel=1e-15)
    assert rayleigh_snr_cdf(0.0, p) == 0.0
    assert rayleigh_snr_cdf(9.0, p) == pytest.approx(1 - math.exp(-3), rel=1e-15)
    assert rayleigh_snr_pdf(0.0, p) == pytest.approx(1 / 3, rel=1e-15)
    assert rayleigh_snr_pdf(2.0, RfParams(2.0)) == pytest.approx(math.exp(-1) / 2, rel=1e-15)
    total, _ = integrate.quad(lambda g: rayleigh_snr_pdf(g, p), 0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(DomainError):
        rayleigh_snr_cdf(-1.0, p)
    with pytest.raises(DomainError):
        rayleigh_snr_pdf(-1.0, p)
    with pytest.raises(DomainError):
        RfParams(0.0)


def test_max_user_examples():
    p = RfParams(5.0)
    g = np.array([0.0, 1.0, 5.0, 17.0])
    np.testing.assert_allclose(max_user_cdf(g, p, 1), rayleigh_snr_cdf(g, p), rtol=1e-15)
    np.testing.assert_allclose(max_user_pdf(g, p, 1), rayleigh_snr_pdf(g, p), rtol=1e-15)
    assert max_user_cdf(5.0, p, 2) == pytest.approx(0.3995764, rel=1e-7)
    assert max_user_cdf(5.0, p, 4) == pytest.approx(0.1596613, rel=1e-6)
    e = math.exp(-1)
    assert max_user_pdf(5.0, p, 3) * 5.0 == pytest.approx(3 * (1 - e) ** 2 * e, rel=1e-14)
    with pytest.raises(DomainError):
        max_user_cdf(1.0, p, 0)
    with pytest.raises(DomainError):
        max_user_pdf(1.0, p, 2.5)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 8])
def test_max_user_forms_agree(n):
    # Away from g -> 0, where 1 - sum cancels to the size of the CDF itself.
    p = RfParams(7.0)
    g = 7.0 * np.array([1.0, 2.0, 5.0, 10.0])
    np.testing.assert_allclose(max_user_cdf(g, p, n, "expanded"), max_user_cdf(g, p, n), rtol=1e-12)
    np.testing.assert_allclose(max_user_pdf(g, p, n, "expanded"), max_user_pdf(g, p, n), rtol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 4, 8])
def test_max_user_pdf_normalised_and_derivative(n):
    p = RfParams(2.5)
    total, _ = integrate.quad(lambda g: max_user_pdf(g, p, n, "expanded"), 0, np.inf, epsabs=1e-13)
    assert total == pytest.approx(1.0, abs=1e-9)
    g = np.geomspace(0.1, 20.0, 25)
    h = 1e-5 * g
    numeric = (max_user_cdf(g + h, p, n) - max_user_cdf(g - h, p, n)) / (2 * h)
    np.testing.assert_allclose(max_user_pdf(g, p, n), numeric, rtol=1e-6)
    # The expanded sum cancels to the size of the pdf for g << mean, so its
    # interior is g >= mean / 2, where the cancellation costs under 3 digits.
    inner = g >= 1.25
    np.testing.assert_allclose(max_user_pdf(g[inner], p, n, "expanded"), numeric[inner], rtol=1e-6)


# -- FSO hop ----------------------------------------------------------------------------

def test_fso_cdf_oracles():
    assert fso_snr_cdf(0.0, 1.0, MODERATE) == 0.0
    assert rel_err(fso_snr_cdf(2.0, 2.0, MODERATE), oracle("fso_cdf_moderate_at_mean")) <= 1e-9
    assert rel_err(fso_snr_cdf(0.3, 3.0, STRONG), oracle("fso_cdf_strong_at_tenth_mean")) <= 1e-9
    with pytest.raises(DomainError):
        fso_snr_cdf(-1.0, 1.0, MODERATE)


@REGIMES
def test_cdfs_monotone_bounded(t):
    mean = 4.0
    g = mean * np.geomspace(1e-4, 1e4, 100)
    for f in (fso_snr_cdf(g, mean, t), rayleigh_snr_cdf(g, RfParams(mean)),
              max_user_cdf(g, RfParams(mean), 3)):
        assert np.all(np.diff(f) >= 0)
        assert np.all((f >= 0) & (f <= 1))


def test_large_xi_removes_pointing_error():
    t = TurbulenceParams(4.0, 1.9, 1e6)
    rng = np.random.default_rng(11)
    n = 10 ** 6
    ia = rng.standard_gamma(4.0, n) / 4.0 * rng.standard_gamma(1.9, n) / 1.9
    g = np.array([0.01, 0.1, 1.0, 4.0])
    empirical = [(ia ** 2 < x).mean() for x in g]
    np.testing.assert_allclose(fso_snr_cdf(g, 1.0, t), empirical, atol=5e-3)


# -- samplers -------------------------------------------------------------------------

N_DRAWS = 10 ** 6


def test_rf_sampler_moments_and_law():
    p = RfParams(3.0)
    x = sample_rf_snr(p, np.random.default_rng(1), N_DRAWS)
    assert abs(x.mean() - 3.0) <= 5 * x.std() / math.sqrt(N_DRAWS)
    assert ks_distance(x, lambda g: rayleigh_snr_cdf(g, p)) <= 0.002


def test_samplers_are_reproducible():
    p = RfParams(3.0)
    a = sample_rf_snr(p, np.random.default_rng(42), 10)
    b = sample_rf_snr(p, np.random.default_rng(42), 10)
    assert np.array_equal(a, b)
    c = sample_fso_intensity(STRONG, np.random.default_rng(42), 10)
    d = sample_fso_intensity(STRONG, np.random.default_rng(42), 10)
    assert np.array_equal(c, d)


def test_max_user_sampler_law():
    p = RfParams(2.0)
    x = sample_max_user_snr(p, 4, np.random.default_rng(2), N_DRAWS)
    assert ks_distance(x, lambda g: max_user_cdf(g, p, 4)) <= 0.002


@REGIMES
def test_intensity_factor_means(t):
    rng = np.random.default_rng(3)
    ia = rng.standard_gamma(t.alpha, N_DRAWS) / t.alpha * rng.standard_gamma(t.beta, N_DRAWS) / t.beta
    assert abs(ia.mean() - 1.0) <= 5 * ia.std() / math.sqrt(N_DRAWS)
    ip = (1.0 - rng.random(N_DRAWS)) ** (1.0 / t.xi2)
    target = t.xi2 / (t.xi2 + 1.0)
    assert abs(ip.mean() - target) <= 5 * ip.std() / math.sqrt(N_DRAWS)
    full = sample_fso_intensity(t, rng, N_DRAWS)
    assert abs(full.mean() - target) <= 5 * full.std() / math.sqrt(N_DRAWS)


@REGIMES
def test_fso_sampler_matches_cdf(t):
    mean = 10.0
    x = sample_fso_snr(mean, t, np.random.default_rng(4), N_DRAWS)
    cdf = tabulated_cdf(lambda g: fso_snr_cdf(g, mean, t), 1e-12 * mean, 1e4 * mean)
    assert ks_distance(x, cdf) <= 0.002


# -- properties ---------------------------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-2, 1e2), st.integers(1, 8))
def test_max_user_cdf_properties(g, mean, n):
    p = RfParams(mean)
    f = max_user_cdf(g, p, n)
    assert 0.0 <= f <= rayleigh_snr_cdf(g, p) <= 1.0
    assert max_user_cdf(g * 1.5, p, n) >= f


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-1, 1e3))
def test_fso_cdf_property(g, mean):
    f = fso_snr_cdf(np.array([g, 2 * g]), mean, STRONG)
    assert 0.0 <= f[0] <= f[1] <= 1.0
    # the CDF depends on g and the mean only through g / mean
    assert fso_snr_cdf(g, mean, STRONG) == pytest.approx(fso_snr_cdf(2 * g, 2 * mean, STRONG), rel=1e-12)
