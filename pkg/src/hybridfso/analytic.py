"""Closed-form outage probability and DPSK BER of the relay-assisted hybrid link.

Two relaying schemes are covered. With known CSI the relay detects and
forwards (DF) over the better of its FSO and RF links. With unknown CSI it
amplifies with a fixed gain (AF) on both links, and the destination keeps the
stronger branch.

Every closed form returns a value together with an error bound assembled from
the Meijer-G bounds and the rounding of the (alternating) sums. A result whose
bound exceeds ``max_rel_error`` times its magnitude raises AccuracyError.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from . import channels
from .channels import TurbulenceParams
from .errors import AccuracyError, DomainError, NumericalNonConvergenceError
from .quadrature import EPS, gk15_adaptive
from .special import (MeijerGSpec, binomial, bivariate_meijer_g_with_error, laplace_product_spec,
                      log_gamma, meijer_g_with_error)

__all__ = [
    "Scheme", "SystemConfig", "pout_df", "ber_df", "cdf_af_fso_branch", "cdf_af_rf_branch",
    "pout_af", "ber_af", "pout", "ber", "ber_from_cdf_quadrature", "pout_df_xi_zero_limit",
    "outage_form_gap",
]


class Scheme(enum.Enum):
    KNOWN_CSI_DF = "KnownCsiDF"
    UNKNOWN_CSI_AF = "UnknownCsiAF"

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        key = text.strip().lower()
        for s in cls:
            if key in (s.value.lower(), s.name.lower(), s.name.split("_")[-1].lower()):
                return s
        raise DomainError(f"unknown scheme {text!r} (expected DF or AF)")

    @property
    def short(self) -> str:
        return "DF" if self is Scheme.KNOWN_CSI_DF else "AF"


@dataclass(frozen=True)
class SystemConfig:
    """One scenario. SNRs and thresholds are linear."""

    scheme: Scheme
    n_users: int
    mean_snr_rf: float
    mean_snr_fso: float
    gamma_th: float
    turbulence: TurbulenceParams = field(default_factory=lambda: channels.MODERATE)
    eta: float = 1.0
    c_const: float = 1.0

    def __post_init__(self):
        if not isinstance(self.scheme, Scheme):
            object.__setattr__(self, "scheme", Scheme.parse(str(self.scheme)))
        if int(self.n_users) != self.n_users or self.n_users < 1:
            raise DomainError(f"n_users must be a positive integer, got {self.n_users!r}")
        object.__setattr__(self, "n_users", int(self.n_users))
        for name in ("mean_snr_rf", "mean_snr_fso", "gamma_th", "eta", "c_const"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a finite positive number, got {v!r}")

    @property
    def effective_mean_snr_fso(self) -> float:
        """FSO average SNR after optical-to-electrical conversion (eta^2 scaling)."""
        return self.eta ** 2 * self.mean_snr_fso

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


# -- helpers ----------------------------------------------------------------

def _user_coeffs(n: int) -> list[float]:
    """c_k = C(N-1, k) (-1)^k N / (k+1), so that 1 - (1-e^{-x})^N = sum_k c_k e^{-(k+1)x}."""
    return [binomial(n - 1, k) * (-1) ** k * n / (k + 1) for k in range(n)]


def _gamma_arg(gamma_th, cfg: SystemConfig):
    g = np.asarray(cfg.gamma_th if gamma_th is None else gamma_th, dtype=float)
    if np.any(~(g >= 0)) or np.any(~np.isfinite(g)):
        raise DomainError(f"threshold must be finite and nonnegative, got {gamma_th!r}")
    return g


def _require(cfg: SystemConfig, scheme: Scheme):
    if cfg.scheme is not scheme:
        raise DomainError(f"operation requires scheme {scheme.value}, got {cfg.scheme.value}")


class _Sum:
    """Elementwise compensated sum of terms with an accumulated error bound."""

    def __init__(self, shape=()):
        self.shape = shape
        self.terms: list[np.ndarray] = []
        self.err = np.zeros(shape)

    def add(self, term, err=0.0):
        t = np.broadcast_to(np.asarray(term, dtype=float), self.shape)
        self.terms.append(t)
        self.err = self.err + np.abs(err)

    def result(self):
        arr = np.stack(self.terms).reshape(len(self.terms), -1)
        total = np.array([math.fsum(col) for col in arr.T]).reshape(self.shape)
        err = self.err + 4.0 * EPS * np.abs(arr).sum(axis=0).reshape(self.shape)
        return total, err


def _finish(value, err, max_rel_error, what, clip=(0.0, 1.0)):
    value = np.asarray(value, dtype=float)
    err = np.asarray(err, dtype=float)
    bad = err > max_rel_error * np.abs(value)
    # A zero-valued result (gamma_th = 0) carries no error.
    bad &= ~((value == 0) & (err == 0))
    if np.any(bad):
        i = np.unravel_index(np.argmax(bad), bad.shape) if bad.ndim else ()
        raise AccuracyError(
            f"{what}: error bound {float(err[i]):.3g} exceeds {max_rel_error:g} "
            f"relative to {float(value[i]):.6g}", value=float(value[i]), error=float(err[i]))
    value = np.clip(value, *clip)
    return float(value) if value.ndim == 0 else value


def _log_c_prime(t: TurbulenceParams) -> float:
    """log of xi^2 2^(alpha+beta-3) / (pi Gamma(alpha) Gamma(beta))."""
    return (math.log(t.xi2) + (t.alpha + t.beta - 3.0) * math.log(2.0) - math.log(math.pi)
            - log_gamma(t.alpha) - log_gamma(t.beta))


def _g_eval(spec, z, rtol=1e-13):
    z = np.asarray(z, dtype=float)
    v, e = meijer_g_with_error(spec, z.ravel(), rtol=rtol, guarantee=1e-6)
    return v.reshape(z.shape), e.reshape(z.shape)


def fso_cdf_with_error(gamma, mean_snr_fso: float, t: TurbulenceParams):
    """FSO SNR CDF and its error bound (vectorised)."""
    g = np.asarray(gamma, dtype=float)
    val = np.zeros(g.shape)
    err = np.zeros(g.shape)
    pos = g > 0
    if np.any(pos):
        z = t.alpha * t.beta * t.kappa * np.sqrt(g[pos] / mean_snr_fso)
        gv, ge = _g_eval(channels.fso_cdf_spec(t), z)
        pref = math.exp(channels.fso_log_prefactor(t))
        val[pos] = pref * gv
        err[pos] = pref * ge + 4 * EPS * np.abs(val[pos])
    return val, err


# -- known CSI: detect and forward --------------------------------------------

def pout_df(cfg: SystemConfig, gamma_th=None, *, form: str = "product", max_rel_error: float = 1e-6):
    """DF outage 1 - [1 - F_access(g)] [1 - F_fso(g) F_rf(g)].

    ``form="product"`` evaluates the compact product, ``"expanded"`` the
    binomial expansion of the access-hop factor.
    """
    _require(cfg, Scheme.KNOWN_CSI_DF)
    g = _gamma_arg(gamma_th, cfg)
    x = g / cfg.mean_snr_rf
    ff, ff_err = fso_cdf_with_error(g, cfg.effective_mean_snr_fso, cfg.turbulence)
    f_rf = -np.expm1(-x)
    if form == "product":
        a = f_rf ** cfg.n_users
        b = ff * f_rf
        value = a + b * (1.0 - a)
        err = ff_err * f_rf + 4 * EPS * value
    elif form == "expanded":
        acc = _Sum(g.shape)
        acc.add(1.0)
        for k, ck in enumerate(_user_coeffs(cfg.n_users)):
            ek = np.exp(-(k + 1) * x)
            ek2 = np.exp(-(k + 2) * x)
            acc.add(-ck * ek)
            acc.add(ck * ek * ff, abs(ck) * ek * ff_err)
            acc.add(-ck * ek2 * ff, abs(ck) * ek2 * ff_err)
        value, err = acc.result()
    else:
        raise DomainError(f"unknown form {form!r}")
    return _finish(value, err, max_rel_error, "DF outage")


def pout_df_xi_zero_limit(cfg: SystemConfig, gamma_th=None, *, form: str = "exact"):
    """DF outage in the limit of vanishing FSO link (xi -> 0, F_fso -> 1).

    ``form="exact"`` gives 1 - [1 - (1 - e)^N] e with e = exp(-g/mean_rf).
    ``form="access_only"`` gives (1 - e)^N, which keeps only the access hop.
    """
    _require(cfg, Scheme.KNOWN_CSI_DF)
    g = _gamma_arg(gamma_th, cfg)
    e = np.exp(-g / cfg.mean_snr_rf)
    a = (-np.expm1(-g / cfg.mean_snr_rf)) ** cfg.n_users
    if form == "exact":
        out = 1.0 - (1.0 - a) * e
    elif form == "access_only":
        out = a
    else:
        raise DomainError(f"unknown form {form!r}")
    return float(out) if np.ndim(out) == 0 else out


def _laplace_fso_cdf(sigma, cfg: SystemConfig):
    """∫_0^∞ e^{-sigma g} F_fso(g) dg via G^{6,3}_{5,8}; returns (value, error)."""
    t = cfg.turbulence
    x2 = t.xi2
    spec = MeijerGSpec(
        6, 3,
        (0.0, 0.5, 1.0, (1.0 + x2) / 2, (2.0 + x2) / 2),
        (x2 / 2, (1.0 + x2) / 2, t.alpha / 2, (1.0 + t.alpha) / 2, t.beta / 2, (1.0 + t.beta) / 2, 0.0, 0.5),
    )
    sigma = np.asarray(sigma, dtype=float)
    z = (t.alpha * t.beta * t.kappa) ** 2 / (16.0 * cfg.effective_mean_snr_fso * sigma)
    gv, ge = _g_eval(spec, z)
    pref = np.exp(_log_c_prime(t)) / sigma
    return pref * gv, pref * ge


def ber_df(cfg: SystemConfig, *, max_rel_error: float = 1e-6):
    """DPSK BER of the DF scheme, ½ ∫ e^{-g} P_out(g) dg in closed form."""
    _require(cfg, Scheme.KNOWN_CSI_DF)
    m = cfg.mean_snr_rf
    cks = _user_coeffs(cfg.n_users)
    n = len(cks)
    sig1 = np.array([1.0 + (k + 1) / m for k in range(n)])
    sig2 = np.array([1.0 + (k + 2) / m for k in range(n)])
    l1, e1 = _laplace_fso_cdf(sig1, cfg)
    l2, e2 = _laplace_fso_cdf(sig2, cfg)
    acc = _Sum()
    acc.add(0.5)
    for k, ck in enumerate(cks):
        acc.add(-0.5 * ck / sig1[k])
        acc.add(0.5 * ck * l1[k], 0.5 * abs(ck) * e1[k])
        acc.add(-0.5 * ck * l2[k], 0.5 * abs(ck) * e2[k])
    value, err = acc.result()
    return _finish(value, err, max_rel_error, "DF BER", clip=(0.0, 0.5))


# -- unknown CSI: fixed-gain amplify and forward --------------------------------
#
# The RF kernels G^{2,0}_{0,2}(z | 1, 0) and its Laplace transform
# G^{2,1}_{1,2}(z | 0; 1, 0) tend to 1 as z -> 0, which is where high SNR puts
# them. The default ("stable") route therefore works with their complements
#   H(z)  = 1 - G^{2,0}_{0,2}(z | 1, 0)    = G^{2,1}_{1,3}(z | 1; 1, 1, 0),
#   HL(z) = 1 - G^{2,1}_{1,2}(z | 0; 1, 0) = G^{2,2}_{2,3}(z | 0, 1; 1, 1, 0),
# and sums the special-function-free parts of each closed form exactly:
# sum_k c_k e^{-(k+1)x} = 1 - (1 - e^{-x})^N, and the elementary part of the
# BER is ½ prod_{j=1}^{2N} j / (m + j). ``form="direct"`` evaluates the
# printed sums term by term instead.

def _af_fso_spec(t: TurbulenceParams, with_laplace: bool = False) -> MeijerGSpec:
    x2 = t.xi2
    a = (0.5, 1.0, (1.0 + x2) / 2, (2.0 + x2) / 2)
    b = (1.0, x2 / 2, (1.0 + x2) / 2, t.alpha / 2, (1.0 + t.alpha) / 2, t.beta / 2,
         (1.0 + t.beta) / 2, 0.0, 0.5)
    if with_laplace:
        return MeijerGSpec(7, 3, (0.0,) + a, b)
    return MeijerGSpec(7, 2, a, b)


_RF_KERNEL = MeijerGSpec(2, 0, (), (1.0, 0.0))
_RF_KERNEL_LAPLACE = MeijerGSpec(2, 1, (0.0,), (1.0, 0.0))
_RF_COMPLEMENT = MeijerGSpec(2, 1, (1.0,), (1.0, 1.0, 0.0))
_RF_COMPLEMENT_LAPLACE = MeijerGSpec(2, 2, (0.0, 1.0), (1.0, 1.0, 0.0))
_FORMS = ("stable", "direct")


def _check_form(form, allowed=_FORMS):
    if form not in allowed:
        raise DomainError(f"unknown form {form!r} (expected one of {', '.join(allowed)})")


def _af_fso_scale(cfg: SystemConfig) -> float:
    """z = scale * g * (k+1) in the FSO-branch kernel."""
    t = cfg.turbulence
    return (t.alpha * t.beta * t.kappa) ** 2 * cfg.c_const / (16.0 * cfg.effective_mean_snr_fso * cfg.mean_snr_rf)


def _af_rf_scale(cfg: SystemConfig) -> float:
    return cfg.c_const / cfg.mean_snr_rf ** 2


def _kernel_at(spec, z, zero_limit, rtol=1e-13):
    """Meijer-G values with the z -> 0 limit substituted where z == 0."""
    zero = z == 0
    v, e = _g_eval(spec, np.where(zero, 1.0, z), rtol)
    return np.where(zero, zero_limit, v), np.where(zero, 0.0, e)


def _af_branch_terms(g, cfg: SystemConfig, rf_kernel=_RF_COMPLEMENT):
    """Per-k kernel values shared by the branch CDFs and the outage forms.

    Returns e_k = exp(-(k+1) x), c', the FSO kernel G^{7,2}_{4,9} and the RF
    kernel (its complement H unless ``rf_kernel`` says otherwise), each
    with its error bound.
    """
    n = cfg.n_users
    x = g / cfg.mean_snr_rf
    cprime = math.exp(_log_c_prime(cfg.turbulence))
    k1 = np.arange(1, n + 1, dtype=float).reshape((n,) + (1,) * g.ndim)
    gf, gf_err = _kernel_at(_af_fso_spec(cfg.turbulence), _af_fso_scale(cfg) * g * k1, 0.0)
    limit = 0.0 if rf_kernel is _RF_COMPLEMENT else 1.0
    gr, gr_err = _kernel_at(rf_kernel, _af_rf_scale(cfg) * g * k1, limit)
    e = np.exp(-k1 * x)
    return e, cprime, gf, gf_err, gr, gr_err


def _pin_zero(g, value_err):
    """Every AF CDF vanishes exactly at g = 0."""
    value, err = value_err
    zero = g == 0
    return np.where(zero, 0.0, value), np.where(zero, 0.0, err)


def _max_user_cdf(g, cfg):
    """(1 - e^{-x})^N with its rounding bound."""
    f1 = (-np.expm1(-g / cfg.mean_snr_rf)) ** cfg.n_users
    return f1, (cfg.n_users + 2) * EPS * f1


def cdf_af_fso_branch(gamma, cfg: SystemConfig, *, form: str = "stable", max_rel_error: float = 1e-6):
    """CDF of the AF FSO-branch SNR g1 g2/(g2 + C)."""
    _require(cfg, Scheme.UNKNOWN_CSI_AF)
    _check_form(form)
    g = _gamma_arg(gamma, cfg)
    value, err = _af_fso_cdf_raw(g, cfg, form)
    return _finish(value, err, max_rel_error, "AF FSO-branch CDF")


def _af_fso_cdf_raw(g, cfg, form="stable", terms=None):
    e, cp, gf, gf_err, _, _ = terms if terms is not None else _af_branch_terms(g, cfg)
    acc = _Sum(g.shape)
    if form == "stable":
        acc.add(*_max_user_cdf(g, cfg))
    else:
        acc.add(1.0)
    for k, ck in enumerate(_user_coeffs(cfg.n_users)):
        if form == "direct":
            acc.add(-ck * e[k])
        acc.add(ck * e[k] * cp * gf[k], abs(ck) * e[k] * cp * gf_err[k])
    return _pin_zero(g, acc.result())


def cdf_af_rf_branch(gamma, cfg: SystemConfig, *, form: str = "stable", max_rel_error: float = 1e-6):
    """CDF of the AF RF-branch SNR g1 g2/(g2 + C)."""
    _require(cfg, Scheme.UNKNOWN_CSI_AF)
    _check_form(form)
    g = _gamma_arg(gamma, cfg)
    value, err = _af_rf_cdf_raw(g, cfg, form)
    return _finish(value, err, max_rel_error, "AF RF-branch CDF")


def _af_rf_cdf_raw(g, cfg, form="stable", terms=None):
    acc = _Sum(g.shape)
    cks = _user_coeffs(cfg.n_users)
    if form == "stable":
        e, _, _, _, h, h_err = terms if terms is not None else _af_branch_terms(g, cfg)
        acc.add(*_max_user_cdf(g, cfg))
        for k, ck in enumerate(cks):
            acc.add(ck * e[k] * h[k], abs(ck) * e[k] * h_err[k])
    else:
        e, _, _, _, gr, gr_err = _af_branch_terms(g, cfg, rf_kernel=_RF_KERNEL)
        acc.add(1.0)
        for k, ck in enumerate(cks):
            acc.add(-ck * e[k] * gr[k], abs(ck) * e[k] * gr_err[k])
    return _pin_zero(g, acc.result())


def _expanded_af_outage(g, cfg):
    """The double binomial sum for the AF outage, expanded exactly.

    With d = expm1(-x), e_k = (1 + d)^{k+1}, G^{2,0}_k = 1 - H_k and
    Q_k = c' G^{7,2}_k, every term of
      1 - sum_k c_k e_k (1 - Q_k) - sum_k c_k e_k (1 - H_k)
        + sum_{k,g} c_k c_g e_k e_g (1 - H_k)(1 - Q_g)
    is a monomial d^j [H_k] [Q_g] with a rational coefficient. Collecting
    the coefficients in exact arithmetic leaves only monomials that survive
    the cancellation, so the floating-point sum carries no catastrophic loss.
    """
    n = cfg.n_users
    e, cp, gf, gf_err, h, h_err = _af_branch_terms(g, cfg)
    q, q_err = cp * gf, cp * gf_err
    d = np.expm1(-g / cfg.mean_snr_rf)
    cks = [Fraction(binomial(n - 1, k) * (-1) ** k * n, k + 1) for k in range(n)]
    poly: dict[tuple, Fraction] = {}

    def put(power, coeff, hk=None, qg=None):
        for j in range(power + 1):
            key = (j, hk, qg)
            poly[key] = poly.get(key, Fraction(0)) + coeff * binomial(power, j)

    put(0, Fraction(1))
    for k, ck in enumerate(cks):
        put(k + 1, -2 * ck)
        put(k + 1, ck, qg=k)
        put(k + 1, ck, hk=k)
        for j, cg in enumerate(cks):
            w = ck * cg
            put(k + j + 2, w)
            put(k + j + 2, -w, hk=k)
            put(k + j + 2, -w, qg=j)
            put(k + j + 2, w, hk=k, qg=j)

    def factor(vals, errs, idx):
        if idx is None:
            return 1.0, 0.0
        v = vals[idx]
        return v, np.divide(errs[idx], np.abs(v), out=np.zeros(g.shape), where=v != 0)

    acc = _Sum(g.shape)
    for (j, hk, qg), coeff in poly.items():
        if coeff == 0:
            continue
        fh, rh = factor(h, h_err, hk)
        fq, rq = factor(q, q_err, qg)
        term = float(coeff) * d ** j * fh * fq
        acc.add(term, np.abs(term) * ((j + 2) * EPS + rh + rq))
    return _pin_zero(g, acc.result())


def pout_af(cfg: SystemConfig, gamma_th=None, *, form: str = "product", max_rel_error: float = 1e-6):
    """AF outage, the product of the two branch CDFs.

    ``form="expanded"`` evaluates the equivalent double binomial sum;
    ``form="direct"`` multiplies the branch CDFs as printed term by term.
    """
    _require(cfg, Scheme.UNKNOWN_CSI_AF)
    g = _gamma_arg(gamma_th, cfg)
    if form in ("product", "direct"):
        branch_form = "stable" if form == "product" else "direct"
        terms = _af_branch_terms(g, cfg) if form == "product" else None
        ff, ef = _af_fso_cdf_raw(g, cfg, branch_form, terms)
        fr, er = _af_rf_cdf_raw(g, cfg, branch_form, terms)
        value = ff * fr
        err = np.abs(ff) * er + np.abs(fr) * ef + ef * er + 2 * EPS * np.abs(value)
    elif form == "expanded":
        value, err = _expanded_af_outage(g, cfg)
    else:
        raise DomainError(f"unknown form {form!r}")
    return _finish(value, err, max_rel_error, "AF outage")


def _first_hop_ber(m: float, order: int) -> float:
    """½ ∫ e^{-g} (1 - e^{-g/m})^order dg = ½ prod_{j=1}^{order} j / (m + j)."""
    return 0.5 * math.prod(j / (m + j) for j in range(1, order + 1))


def ber_af(cfg: SystemConfig, *, form: str = "stable", max_rel_error: float = 1e-3, rtol: float = 1e-14):
    """DPSK BER of the AF scheme in closed form.

    Single-sum terms are Laplace transforms of the branch kernels
    (G^{7,3}_{5,9} and G^{2,1}_{1,2}); the cross terms are extended
    bivariate Meijer-G values E(x, y) = ∫ e^{-t} G^{2,0}_{0,2}(x t) G^{7,2}_{4,9}(y t) dt.
    """
    _require(cfg, Scheme.UNKNOWN_CSI_AF)
    _check_form(form)
    m = cfg.mean_snr_rf
    cks = _user_coeffs(cfg.n_users)
    n = len(cks)
    cp = math.exp(_log_c_prime(cfg.turbulence))
    a_s = _af_fso_scale(cfg)
    b_s = _af_rf_scale(cfg)
    k1 = np.arange(1, n + 1, dtype=float)
    sig = 1.0 + k1 / m
    stable = form == "stable"
    rf_spec = _RF_COMPLEMENT_LAPLACE if stable else _RF_KERNEL_LAPLACE
    # In the stable route the RF terms enter with the opposite sign.
    rf_sign = -1.0 if stable else 1.0

    gf, gf_err = _g_eval(_af_fso_spec(cfg.turbulence, with_laplace=True), a_s * k1 / sig, rtol)
    gr, gr_err = _g_eval(rf_spec, b_s * k1 / sig, rtol)

    biv = laplace_product_spec(_RF_KERNEL, _af_fso_spec(cfg.turbulence))
    acc = _Sum()
    if stable:
        p0 = _first_hop_ber(m, 2 * n)
        acc.add(p0, 4 * n * EPS * p0)
    else:
        acc.add(0.5)
    for k, ck in enumerate(cks):
        w = 0.5 * ck / sig[k]
        if not stable:
            acc.add(-w)
        acc.add(w * cp * gf[k], abs(w) * cp * gf_err[k])
        acc.add(-rf_sign * w * gr[k], abs(w) * gr_err[k])
    for k, ck in enumerate(cks):
        for j, cg in enumerate(cks):
            skg = 1.0 + (k + j + 2) / m
            grk, grk_err = _g_eval(rf_spec, np.array([b_s * (k + 1) / skg]), rtol)
            w = 0.5 * ck * cg / skg
            acc.add(rf_sign * w * grk[0], abs(w) * grk_err[0])
            ev, ee = bivariate_meijer_g_with_error(
                biv, b_s * (k + 1) / skg, a_s * (j + 1) / skg, rtol=rtol, guarantee=1e-6)
            acc.add(-w * cp * ev, abs(w) * cp * ee)
    value, err = acc.result()
    return _finish(value, err, max_rel_error, "AF BER", clip=(0.0, 0.5))


# -- dispatch and numerical fallback -------------------------------------------

def pout(cfg: SystemConfig, gamma_th=None, **kw):
    """Outage probability of the configured scheme."""
    f = pout_df if cfg.scheme is Scheme.KNOWN_CSI_DF else pout_af
    return f(cfg, gamma_th, **kw)


def ber(cfg: SystemConfig, **kw):
    """DPSK BER of the configured scheme."""
    f = ber_df if cfg.scheme is Scheme.KNOWN_CSI_DF else ber_af
    return f(cfg, **kw)


def outage_form_gap(cfg: SystemConfig, gamma_th=None) -> float:
    """Largest relative difference between the compact and expanded outage forms."""
    a = np.asarray(pout(cfg, gamma_th, form="product"))
    b = np.asarray(pout(cfg, gamma_th, form="expanded"))
    scale = np.maximum(np.abs(a), np.finfo(float).tiny)
    return float(np.max(np.abs(a - b) / scale))


def ber_from_cdf_quadrature(cdf: Callable, tolerance: float = 1e-9, *, rtol: float = 0.0) -> float:
    """½ ∫_0^∞ e^{-g} F(g) dg, computed as ½ ∫_0^1 F(-ln t) dt.

    ``cdf`` is called with a NumPy array of SNRs (a scalar-only callable is
    applied pointwise). The absolute error estimate is kept below
    ``max(tolerance, rtol * result)``.
    """
    if not tolerance > 0 and not rtol > 0:
        raise DomainError("need a positive tolerance")

    def f(t):
        g = -np.log(t)
        try:
            v = np.asarray(cdf(g), dtype=float)
            if v.shape != g.shape:
                raise TypeError
        except (TypeError, ValueError):
            v = np.array([float(cdf(float(x))) for x in g])
        return 0.5 * v[None, :]

    # Geometric breakpoints toward t = 0 resolve large-SNR behaviour.
    bps = [0.0] + [10.0 ** (-k) for k in range(12, 0, -1)] + [0.5, 1.0]
    try:
        q = gk15_adaptive(f, bps, rtol=rtol, atol=tolerance, batch=1, max_intervals=20000)
    except NumericalNonConvergenceError as exc:
        raise NumericalNonConvergenceError(f"BER quadrature: {exc}") from exc
    return float(q.value[0])
