"""Channel models for both hops.

The FSO hop uses Gamma-Gamma turbulence with pointing error. Its SNR is
gamma = mean_snr * (I / kappa)**2 with I = I_a * I_p, where I_a is the
product of two unit-mean Gamma variates and I_p = u**(1/xi^2) is the
pointing loss (ceiling A0 = 1). The RF links are Rayleigh, so their SNRs are
exponential. The relay picks the best of N i.i.d. users.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DivergenceError, DomainError
from .special import MeijerGSpec, binomial, log_gamma, meijer_g

__all__ = [
    "TurbulenceParams", "RfParams", "MODERATE", "STRONG", "gg_params_from_rytov",
    "rayleigh_snr_cdf", "rayleigh_snr_pdf", "max_user_cdf", "max_user_pdf",
    "fso_snr_cdf", "fso_cdf_spec", "sample_rf_snr", "sample_fso_intensity",
    "sample_fso_snr", "sample_max_user_snr",
]


def gg_params_from_rytov(rytov_variance: float) -> tuple[float, float]:
    """Gamma-Gamma shapes (alpha, beta) for a plane wave with Rytov variance s2."""
    s2 = float(rytov_variance)
    if not math.isfinite(s2) or s2 < 0:
        raise DomainError(f"Rytov variance must be a finite nonnegative number, got {rytov_variance!r}")
    if s2 == 0:
        raise DivergenceError("alpha and beta diverge at zero Rytov variance")
    s125 = s2 ** 1.2      # sigma_R^{12/5} with sigma_R^2 = s2
    ea = math.expm1(0.49 * s2 / (1.0 + 1.11 * s125) ** (7.0 / 6.0))
    eb = math.expm1(0.51 * s2 / (1.0 + 0.69 * s125) ** (5.0 / 6.0))
    return 1.0 / ea, 1.0 / eb


@dataclass(frozen=True)
class TurbulenceParams:
    """Gamma-Gamma shapes, pointing-error ratio xi and CDF normalisation kappa."""

    alpha: float
    beta: float
    xi: float
    kappa: float = 1.0
    rytov_variance: Optional[float] = None

    def __post_init__(self):
        for name in ("alpha", "beta", "xi", "kappa"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a finite positive number, got {v!r}")
        if self.rytov_variance is not None:
            a, b = gg_params_from_rytov(self.rytov_variance)
            if abs(a - self.alpha) > 1e-12 * a or abs(b - self.beta) > 1e-12 * b:
                raise DomainError("alpha/beta do not match the given Rytov variance")

    @classmethod
    def from_rytov(cls, rytov_variance: float, xi: float, kappa: float = 1.0) -> "TurbulenceParams":
        a, b = gg_params_from_rytov(rytov_variance)
        return cls(a, b, xi, kappa, float(rytov_variance))

    @property
    def xi2(self) -> float:
        return self.xi * self.xi


MODERATE = TurbulenceParams(alpha=4.0, beta=1.9, xi=10.45)
STRONG = TurbulenceParams(alpha=4.2, beta=1.4, xi=2.45)


@dataclass(frozen=True)
class RfParams:
    """Rayleigh link described by its average SNR (linear)."""

    mean_snr: float

    def __post_init__(self):
        if not (math.isfinite(self.mean_snr) and self.mean_snr > 0):
            raise DomainError(f"mean_snr must be positive, got {self.mean_snr!r}")


def _snr_arg(gamma):
    g = np.asarray(gamma, dtype=float)
    if np.any(~(g >= 0)):
        raise DomainError(f"SNR must be nonnegative, got {gamma!r}")
    return g


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _check_users(n_users) -> int:
    if int(n_users) != n_users or n_users < 1:
        raise DomainError(f"n_users must be a positive integer, got {n_users!r}")
    return int(n_users)


def rayleigh_snr_cdf(gamma, params: RfParams):
    """1 - exp(-gamma / mean)."""
    g = _snr_arg(gamma)
    return _out(-np.expm1(-g / params.mean_snr))


def rayleigh_snr_pdf(gamma, params: RfParams):
    g = _snr_arg(gamma)
    return _out(np.exp(-g / params.mean_snr) / params.mean_snr)


def max_user_cdf(gamma, params: RfParams, n_users: int, form: str = "product"):
    """CDF of the best of N i.i.d. exponential SNRs.

    ``form="product"`` gives (1 - e^{-g/m})^N; ``"expanded"`` the binomial sum
    1 - sum_k C(N-1,k) (-1)^k N/(k+1) e^{-(k+1) g/m}.
    """
    n = _check_users(n_users)
    g = _snr_arg(gamma)
    if form == "product":
        return _out((-np.expm1(-g / params.mean_snr)) ** n)
    if form == "expanded":
        terms = [binomial(n - 1, k) * (-1) ** k * n / (k + 1) * np.exp(-(k + 1) * g / params.mean_snr)
                 for k in range(n)]
        return _out(1.0 - _fsum_arrays(terms))
    raise DomainError(f"unknown form {form!r}")


def max_user_pdf(gamma, params: RfParams, n_users: int, form: str = "product"):
    """Density of the best of N i.i.d. exponential SNRs (product or expanded form)."""
    n = _check_users(n_users)
    g = _snr_arg(gamma)
    m = params.mean_snr
    if form == "product":
        e = np.exp(-g / m)
        return _out(n / m * (-np.expm1(-g / m)) ** (n - 1) * e)
    if form == "expanded":
        terms = [binomial(n - 1, k) * (-1) ** k * n / m * np.exp(-(k + 1) * g / m) for k in range(n)]
        return _out(_fsum_arrays(terms))
    raise DomainError(f"unknown form {form!r}")


def _fsum_arrays(terms):
    """Compensated elementwise sum of a list of equally shaped arrays."""
    arr = np.stack([np.asarray(t, dtype=float) for t in terms])
    flat = arr.reshape(arr.shape[0], -1)
    out = np.array([math.fsum(col) for col in flat.T])
    return out.reshape(arr.shape[1:])


def fso_cdf_spec(params: TurbulenceParams) -> MeijerGSpec:
    """G^{3,1}_{2,4}(. | 1, xi^2+1; xi^2, alpha, beta, 0)."""
    x2 = params.xi2
    return MeijerGSpec(3, 1, (1.0, x2 + 1.0), (x2, params.alpha, params.beta, 0.0))


def fso_log_prefactor(params: TurbulenceParams) -> float:
    """log of xi^2 / (Gamma(alpha) Gamma(beta))."""
    return math.log(params.xi2) - log_gamma(params.alpha) - log_gamma(params.beta)


def fso_snr_cdf(gamma, mean_snr_fso: float, params: TurbulenceParams):
    """CDF of the FSO SNR with Gamma-Gamma turbulence and pointing error."""
    g = _snr_arg(gamma)
    if not mean_snr_fso > 0:
        raise DomainError("mean_snr_fso must be positive")
    flat = np.atleast_1d(g).ravel()
    out = np.zeros(flat.shape)
    pos = flat > 0
    if np.any(pos):
        z = params.alpha * params.beta * params.kappa * np.sqrt(flat[pos] / mean_snr_fso)
        out[pos] = math.exp(fso_log_prefactor(params)) * meijer_g(fso_cdf_spec(params), z)
    out = np.clip(out, 0.0, 1.0)
    return _out(out.reshape(g.shape))


# -- samplers ---------------------------------------------------------------

def sample_rf_snr(params: RfParams, rng: np.random.Generator, size=None):
    """Exponential SNR with mean ``params.mean_snr``."""
    return rng.exponential(params.mean_snr, size)


def sample_max_user_snr(params: RfParams, n_users: int, rng: np.random.Generator, size=None):
    """Best of N i.i.d. exponential SNRs."""
    n = _check_users(n_users)
    shape = (n,) if size is None else (n,) + tuple(np.atleast_1d(size))
    return rng.exponential(params.mean_snr, shape).max(axis=0)


def sample_fso_intensity(params: TurbulenceParams, rng: np.random.Generator, size=None):
    """I = I_a * I_p with unit-mean Gamma-Gamma I_a and pointing loss u**(1/xi^2)."""
    ga = rng.standard_gamma(params.alpha, size) / params.alpha
    gb = rng.standard_gamma(params.beta, size) / params.beta
    u = 1.0 - rng.random(size)          # (0, 1]
    return ga * gb * u ** (1.0 / params.xi2)


def sample_fso_snr(mean_snr_fso: float, params: TurbulenceParams, rng: np.random.Generator, size=None):
    """FSO SNR mean * (I / kappa)**2, distributed as ``fso_snr_cdf``."""
    i = sample_fso_intensity(params, rng, size)
    return mean_snr_fso * (i / params.kappa) ** 2
