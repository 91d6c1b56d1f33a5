"""Gamma, binomial and Bessel-K helpers."""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sc

from ..errors import DomainError

_INT64_MAX = 2**63 - 1


def log_gamma(x):
    """ln Gamma(x) for x > 0 (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    if arr.ndim == 0:
        return math.lgamma(float(arr))
    return sc.gammaln(arr)


def binomial(n: int, k: int) -> int:
    """Exact C(n, k) as a Python int that fits in a signed 64-bit word."""
    if int(n) != n or int(k) != k:
        raise DomainError("binomial arguments must be integers")
    n, k = int(n), int(k)
    if n < 0 or k < 0:
        raise DomainError(f"binomial requires nonnegative arguments, got ({n}, {k})")
    if k > n:
        raise DomainError(f"binomial requires k <= n, got ({n}, {k})")
    value = math.comb(n, k)
    if value > _INT64_MAX:
        raise OverflowError(f"C({n}, {k}) exceeds the 64-bit integer range")
    return value


def bessel_k(nu: float, x):
    """Modified Bessel function of the second kind K_nu(x), x > 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"bessel_k requires x > 0, got {x!r}")
    out = sc.kv(nu, arr)
    return float(out) if np.ndim(out) == 0 else out
