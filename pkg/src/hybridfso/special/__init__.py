"""Special functions: gamma helpers, univariate and bivariate Meijer-G."""

from .bivariate import (BivariateGSpec, bivariate_meijer_g, bivariate_meijer_g_with_error,
                        laplace_product_spec)
from .gammafn import bessel_k, binomial, log_gamma
from .meijer import MeijerGSpec, meijer_g, meijer_g_with_error, residue_series

__all__ = [
    "BivariateGSpec", "MeijerGSpec", "bessel_k", "binomial", "bivariate_meijer_g",
    "bivariate_meijer_g_with_error", "laplace_product_spec", "log_gamma", "meijer_g",
    "meijer_g_with_error", "residue_series",
]
