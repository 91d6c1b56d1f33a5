"""Closed-form outage and BER of both relaying schemes."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from helpers import oracle, rel_err
from hybridfso.analytic import (Scheme, SystemConfig, ber, ber_af, ber_df, ber_from_cdf_quadrature,
                                cdf_af_fso_branch, cdf_af_rf_branch, pout, pout_af, pout_df,
                                pout_df_xi_zero_limit)
from hybridfso.channels import MODERATE, STRONG, TurbulenceParams, fso_snr_cdf, max_user_cdf, max_user_pdf, RfParams
from hybridfso.errors import DomainError

DF, AF = Scheme.KNOWN_CSI_DF, Scheme.UNKNOWN_CSI_AF
TH = 10.0                       # 10 dB outage threshold
GRID_DB = (0, 5, 10, 15, 20, 25, 30)


def db(x):
    return 10.0 ** (x / 10.0)


def cfg(scheme, n, avg_db, t=MODERATE, th=TH, **kw):
    s = db(avg_db)
    return SystemConfig(scheme, n, s, s, th, t, **kw)


# -- configuration ---------------------------------------------------------------------

def test_system_config_validation():
    with pytest.raises(DomainError):
        SystemConfig(DF, 0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        SystemConfig(AF, 2, -1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        SystemConfig("XF", 2, 1.0, 1.0, 1.0)
    assert SystemConfig("af", 2, 1.0, 1.0, 1.0).scheme is AF
    assert cfg(DF, 1, 0, eta=0.5).effective_mean_snr_fso == pytest.approx(0.25)


def test_scheme_is_enforced():
    with pytest.raises(DomainError):
        pout_df(cfg(AF, 2, 10))
    with pytest.raises(DomainError):
        ber_af(cfg(DF, 2, 10))


# -- known CSI -------------------------------------------------------------------------

@pytest.mark.parametrize("t", [MODERATE, STRONG], ids=["moderate", "strong"])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_df_outage_forms_agree(t, n):
    for avg in GRID_DB:
        c = cfg(DF, n, avg, t)
        assert rel_err(pout_df(c, form="expanded"), pout_df(c)) <= 1e-10


def test_df_outage_oracle_and_limits():
    c = cfg(DF, 2, 20)
    assert rel_err(pout_df(c), oracle("pout_df_moderate_n2_20db_th10db")) <= 1e-9
    assert pout_df(c, 0.0) == 0.0
    assert pout_df(c, 1e-12) < 1e-20


def test_df_ber_oracle_and_quadrature():
    c = cfg(DF, 2, 10)
    value = ber_df(c)
    assert rel_err(value, oracle("ber_df_moderate_n2_10db")) <= 1e-8
    assert rel_err(value, ber_from_cdf_quadrature(lambda g: pout_df(c, g), 1e-14)) <= 1e-6


def test_df_ber_low_snr_limit():
    assert ber_df(cfg(DF, 2, -80)) == pytest.approx(0.5, abs=1e-6)


def test_xi_zero_limit_examples():
    n64 = cfg(DF, 64, 20)
    x = TH / db(20)
    assert pout_df_xi_zero_limit(n64) == pytest.approx(1 - math.exp(-x), rel=1e-12)
    n1 = SystemConfig(DF, 1, 5.0, 5.0, 5.0)
    assert pout_df_xi_zero_limit(n1) == pytest.approx(1 - math.exp(-2), rel=1e-15)
    assert pout_df_xi_zero_limit(n1, form="access_only") == pytest.approx(1 - math.exp(-1), rel=1e-15)


def test_df_approaches_xi_zero_limit():
    for n in (1, 2, 4):
        c = cfg(DF, n, 15, TurbulenceParams(4.0, 1.9, 1e-4))
        assert abs(pout_df(c) - pout_df_xi_zero_limit(c)) <= 1e-3


def test_df_without_fso_is_two_rayleigh_hops():
    c = cfg(DF, 1, 12)
    x = TH / db(12)
    assert pout_df_xi_zero_limit(c) == pytest.approx(-math.expm1(-2 * x), rel=1e-14)


def test_df_ber_vanishing_fso_link():
    # With the FSO hop gone and N = 1 the end-to-end law is 1 - e^{-2g/m}: BER = 1/(m + 2).
    for avg in (20, 30):
        m = db(avg)
        c = cfg(DF, 1, avg, TurbulenceParams(4.0, 1.9, 1e-3))
        assert rel_err(ber_df(c), 1 / (m + 2)) <= 1e-3


# -- unknown CSI: branch CDFs --------------------------------------------------------------

def _branch_oracle(g, c, hop2_cdf):
    """P(g1 g2/(g2 + C) < g) = F1(g) + ∫ F2(x) f1(g (1 + C/x)) g C / x^2 dx in log x."""
    p = RfParams(c.mean_snr_rf)

    def f(u):
        x = math.exp(u)
        return hop2_cdf(x) * max_user_pdf(g * (1 + c.c_const / x), p, c.n_users) * g * c.c_const / x

    pts = np.log([1e-14, 1e-8, 1e-4, 1e-2, 1, 1e2, 1e4, 1e8])
    body = sum(integrate.quad(f, a, b, epsrel=1e-11, epsabs=0, limit=200)[0] for a, b in zip(pts, pts[1:]))
    return max_user_cdf(g, p, c.n_users) + body


def test_af_branch_oracles():
    c15 = cfg(AF, 2, 15)
    c20 = cfg(AF, 2, 20)
    assert rel_err(cdf_af_fso_branch(TH, c15), oracle("af_fso_branch_moderate_n2_15db_th10db")) <= 1e-8
    assert rel_err(cdf_af_rf_branch(TH, c20), oracle("af_rf_branch_moderate_n2_20db_th10db")) <= 1e-8
    assert rel_err(pout_af(c20), oracle("pout_af_moderate_n2_20db_th10db")) <= 1e-8


def test_af_branch_integral_oracle():
    for t, n, avg, g in ((MODERATE, 2, 15, 10.0), (STRONG, 4, 25, 3.0), (MODERATE, 1, 5, 0.7)):
        c = cfg(AF, n, avg, t)
        fso = _branch_oracle(g, c, lambda x: fso_snr_cdf(x, c.mean_snr_fso, t))
        rf = _branch_oracle(g, c, lambda x: -math.expm1(-x / c.mean_snr_rf))
        assert rel_err(cdf_af_fso_branch(g, c), fso) <= 1e-5
        assert rel_err(cdf_af_rf_branch(g, c), rf) <= 1e-5


def test_af_rf_branch_bessel_reduction():
    # N = 1: F(g) = 1 - e^{-g/m} 2 sqrt(a) K_1(2 sqrt(a)), a = g C / m^2
    c = SystemConfig(AF, 1, 10.0, 10.0, 1.0)
    a = 5.0 / 100.0
    from hybridfso.special import bessel_k
    expected = 1 - math.exp(-0.5) * 2 * math.sqrt(a) * bessel_k(1, 2 * math.sqrt(a))
    assert rel_err(cdf_af_rf_branch(5.0, c), expected) <= 1e-10


@pytest.mark.parametrize("branch", [cdf_af_fso_branch, cdf_af_rf_branch])
def test_af_branch_cdf_shape(branch):
    c = cfg(AF, 2, 15, STRONG)
    assert branch(0.0, c) == 0.0
    g = np.geomspace(1e-3, 1e4, 40)
    f = branch(g, c)
    assert np.all(np.diff(f) >= 0)
    assert np.all((f >= 0) & (f <= 1))
    np.testing.assert_allclose(branch(g, c, form="direct", max_rel_error=1e-4), f, rtol=1e-6)


@pytest.mark.parametrize("t", [MODERATE, STRONG], ids=["moderate", "strong"])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_af_outage_forms_agree(t, n):
    for avg in GRID_DB:
        c = cfg(AF, n, avg, t)
        product = pout_af(c)
        assert rel_err(pout_af(c, form="expanded"), product) <= 1e-8


def test_af_outage_limits():
    c = cfg(AF, 1, 10)
    assert pout_af(c, 0.0) == 0.0
    assert pout_af(c) == pytest.approx(cdf_af_fso_branch(TH, c) * cdf_af_rf_branch(TH, c), rel=1e-14)


def test_af_ber_examples():
    for n, avg in ((2, 10), (1, 15)):
        c = cfg(AF, n, avg)
        quad = ber_from_cdf_quadrature(lambda g: pout_af(c, g), 1e-14, rtol=1e-9)
        assert rel_err(ber_af(c), quad) <= 1e-4
    assert ber_af(cfg(AF, 2, -80)) == pytest.approx(0.5, abs=1e-6)


def test_af_ber_direct_form_at_low_snr():
    c = cfg(AF, 2, 5)
    assert rel_err(ber_af(c, form="direct"), ber_af(c)) <= 1e-8


# -- shape across the grid ---------------------------------------------------------------

@pytest.mark.parametrize("scheme", [DF, AF], ids=["DF", "AF"])
def test_monotone_in_users_and_snr(scheme):
    for avg in (0, 10, 20):
        outs = [pout(cfg(scheme, n, avg)) for n in (1, 2, 4, 8)]
        assert all(b < a for a, b in zip(outs, outs[1:]))
    for metric in (pout, ber):
        vals = [metric(cfg(scheme, 2, avg, STRONG)) for avg in GRID_DB]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert all(0 < v <= (0.5 if metric is ber else 1.0) for v in vals)


# -- BER quadrature ------------------------------------------------------------------

def test_ber_quadrature_examples():
    assert ber_from_cdf_quadrature(lambda g: np.ones_like(g)) == pytest.approx(0.5, abs=1e-12)
    for m in (0.5, 10.0, 1000.0):
        value = ber_from_cdf_quadrature(lambda g: -np.expm1(-g / m), 1e-15)
        assert value == pytest.approx(1 / (2 * (1 + m)), abs=1e-14)
    scalar_only = ber_from_cdf_quadrature(lambda g: -math.expm1(-g / 3.0), 1e-14)
    assert scalar_only == pytest.approx(1 / 8, abs=1e-13)
    with pytest.raises(DomainError):
        ber_from_cdf_quadrature(lambda g: g, 0.0)


# -- properties ---------------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.floats(-5.0, 30.0), st.floats(-5.0, 20.0))
def test_df_outage_property(n, avg, th_db):
    c = cfg(DF, n, avg, th=db(th_db))
    p = pout_df(c)
    assert 0.0 <= p <= 1.0
    # relative agreement, down to the rounding floor of the O(1) binomial terms
    assert abs(pout_df(c, form="expanded") - p) <= 1e-10 * p + 1e-14
    assert pout_df(c, db(th_db) * 1.2) >= p


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.floats(0.0, 25.0), st.floats(0.01, 100.0))
def test_af_branch_property(n, avg, g):
    c = cfg(AF, n, avg, STRONG)
    f = cdf_af_fso_branch(np.array([g, 2 * g]), c)
    r = cdf_af_rf_branch(np.array([g, 2 * g]), c)
    assert 0.0 <= f[0] <= f[1] <= 1.0
    assert 0.0 <= r[0] <= r[1] <= 1.0
    # the branch ratio never exceeds the access-hop SNR
    assert f[0] >= max_user_cdf(g, RfParams(c.mean_snr_rf), n) * (1 - 1e-12)
