"""Shared test utilities."""

import json
import math
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

ORACLE_PATH = Path(__file__).resolve().parent.parent / "oracles" / "values.json"


def oracle(key: str) -> float:
    """A frozen arbitrary-precision reference value."""
    with open(ORACLE_PATH, encoding="utf-8") as fh:
        return float(json.load(fh)[key])


def rel_err(a, b):
    return abs(a - b) / abs(b)


def tabulated_cdf(cdf, lo, hi, points=400):
    """Monotone PCHIP interpolant of ``cdf`` in log-SNR, for KS tests on large samples.

    Below ``lo`` the CDF is taken as 0, above ``hi`` as 1; pick the range so
    both tails carry negligible mass.
    """
    u = np.linspace(math.log(lo), math.log(hi), points)
    f = np.asarray(cdf(np.exp(u)), dtype=float)
    interp = PchipInterpolator(u, f, extrapolate=False)

    def f_hat(x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= hi, 1.0, 0.0)
        inside = (x > lo) & (x < hi)
        out[inside] = interp(np.log(x[inside]))
        return out

    return f_hat


def ks_distance(samples, cdf):
    """Kolmogorov-Smirnov distance between a sample and a (vectorised) CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    f = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def grid_ks(empirical, reference):
    """Largest gap between two CDFs given on the same grid."""
    return float(np.max(np.abs(np.asarray(empirical) - np.asarray(reference))))
