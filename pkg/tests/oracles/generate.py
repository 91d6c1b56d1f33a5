"""Regenerate the frozen reference values in values.json.

Every value here is computed with mpmath alone (its own Meijer-G, Bessel
and quadrature routines) from the defining integrals, never from the
package under test. Run from the repository root:

    python3 tests/oracles/generate.py
"""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 30

MODERATE = dict(alpha=mp.mpf(4), beta=mp.mpf("1.9"), xi=mp.mpf("10.45"))
STRONG = dict(alpha=mp.mpf("4.2"), beta=mp.mpf("1.4"), xi=mp.mpf("2.45"))


def db(x):
    return mp.mpf(10) ** (mp.mpf(x) / 10)


def fso_cdf(g, mean, t, kappa=1):
    """Gamma-Gamma with pointing error, from mpmath's own Meijer-G."""
    if g == 0:
        return mp.mpf(0)
    if g > 1e6 * mean:
        # 1 - F < 1e-30 here, and mpmath's hypergeometric route stalls
        return mp.mpf(1)
    x2 = t["xi"] ** 2
    z = t["alpha"] * t["beta"] * kappa * mp.sqrt(g / mean)
    pref = x2 / (mp.gamma(t["alpha"]) * mp.gamma(t["beta"]))
    return pref * mp.meijerg([[1], [x2 + 1]], [[x2, t["alpha"], t["beta"]], [0]], z)


def max_user_cdf(g, m, n):
    return (-mp.expm1(-g / m)) ** n


def max_user_pdf(g, m, n):
    return n / m * (-mp.expm1(-g / m)) ** (n - 1) * mp.exp(-g / m)


def af_branch_cdf(g, m, n, c, hop2_cdf):
    """P(g1 g2/(g2 + C) < g) = F1(g) + ∫ F2(x) f1(g (1 + C/x)) g C / x^2 dx."""
    if g == 0:
        return mp.mpf(0)

    def integrand(u):
        x = mp.exp(u)
        return hop2_cdf(x) * max_user_pdf(g * (1 + c / x), m, n) * g * c / x

    # f1 carries e^{-g C/(x m)}, so x below g C/(300 m) contributes under e^{-300};
    # above x = m e^100 the integrand is below g C f1(g) / x, a tail under e^{-100}
    lo, hi = mp.log(g * c / (300 * m)), mp.log(m) + 100
    return max_user_cdf(g, m, n) + mp.quad(integrand, sorted([lo, mp.log(c), mp.log(g + c), mp.log(m)]) + [hi])


def af_fso_branch(g, m, n, c, t):
    return af_branch_cdf(g, m, n, c, lambda x: fso_cdf(x, m, t))


def af_rf_branch(g, m, n, c):
    return af_branch_cdf(g, m, n, c, lambda x: -mp.expm1(-x / m))


def df_outage(g, m, n, t):
    f1 = max_user_cdf(g, m, n)
    f2 = fso_cdf(g, m, t) * (-mp.expm1(-g / m))
    return 1 - (1 - f1) * (1 - f2)


def dpsk_ber(cdf):
    """½ ∫ e^{-g} F(g) dg."""
    return mp.quad(lambda g: mp.exp(-g) * cdf(g), [0, 1, 5, 20, 60, mp.inf]) / 2


def g72_49(z, t):
    x2 = t["xi"] ** 2
    a, b = t["alpha"], t["beta"]
    return mp.meijerg([[mp.mpf(1) / 2, 1], [(1 + x2) / 2, (2 + x2) / 2]],
                      [[1, x2 / 2, (1 + x2) / 2, a / 2, (1 + a) / 2, b / 2, (1 + b) / 2], [0, mp.mpf(1) / 2]], z)


def ebmg(x, y, t):
    """∫ e^{-s} G^{2,0}_{0,2}(x s | 1, 0) G^{7,2}_{4,9}(y s) ds with G^{2,0} = 2 sqrt(u) K_1(2 sqrt(u))."""
    def f(s):
        u = x * s
        return mp.exp(-s) * 2 * mp.sqrt(u) * mp.besselk(1, 2 * mp.sqrt(u)) * g72_49(y * s, t)
    # e^{-s} makes the tail beyond s = 150 negligible at 30 digits
    return mp.quad(f, [0, 1, 5, 20, 60, 150])


def gg_from_rytov(s2):
    s2 = mp.mpf(s2)
    a = 1 / (mp.exp(0.49 * s2 / (1 + 1.11 * s2 ** (mp.mpf(6) / 5)) ** (mp.mpf(7) / 6)) - 1)
    b = 1 / (mp.exp(0.51 * s2 / (1 + 0.69 * s2 ** (mp.mpf(6) / 5)) ** (mp.mpf(5) / 6)) - 1)
    return a, b


def main():
    out = {}
    out["log_gamma_4.2"] = mp.loggamma(mp.mpf("4.2"))
    out["bessel_k1_2"] = mp.besselk(1, 2)
    out["bessel_k0_1"] = mp.besselk(0, 1)
    for s2 in ("1.0", "0.25"):
        a, b = gg_from_rytov(s2)
        out[f"rytov_{s2}_alpha"], out[f"rytov_{s2}_beta"] = a, b

    out["fso_cdf_moderate_at_mean"] = fso_cdf(mp.mpf(1), mp.mpf(1), MODERATE)
    out["fso_cdf_strong_at_tenth_mean"] = fso_cdf(mp.mpf("0.1"), mp.mpf(1), STRONG)

    # Extended bivariate Meijer-G, moderate, N = 2, 10 dB, k = g = 0.
    m, c = db(10), mp.mpf(1)
    t = MODERATE
    a_s = (t["alpha"] * t["beta"]) ** 2 * c / (16 * m * m)
    b_s = c / m ** 2
    sig = 1 + 2 / m
    out["ebmg_moderate_n2_10db_x"] = b_s / sig
    out["ebmg_moderate_n2_10db_y"] = a_s / sig
    out["ebmg_moderate_n2_10db"] = ebmg(b_s / sig, a_s / sig, t)

    # AF branch CDFs.
    m, th = db(15), db(10)
    out["af_fso_branch_moderate_n2_15db_th10db"] = af_fso_branch(th, m, 2, c, MODERATE)
    m20 = db(20)
    out["af_rf_branch_moderate_n2_20db_th10db"] = af_rf_branch(th, m20, 2, c)
    out["pout_af_moderate_n2_20db_th10db"] = (af_fso_branch(th, m20, 2, c, MODERATE)
                                              * af_rf_branch(th, m20, 2, c))

    # DF outage and BER.
    out["pout_df_moderate_n2_20db_th10db"] = df_outage(th, m20, 2, MODERATE)
    m10 = db(10)
    out["ber_df_moderate_n2_10db"] = dpsk_ber(lambda g: df_outage(g, m10, 2, MODERATE))

    path = Path(__file__).with_name("values.json")
    path.write_text(json.dumps({k: mp.nstr(v, 17) for k, v in out.items()}, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
