"""Adaptive Gauss-Kronrod (G7/K15) quadrature for batches of integrands.

One interval partition is shared by every member of a batch; an interval is
bisected when any unconverged member still has significant error there. The
integrand receives a 1-D array of nodes and returns an array of shape
``(batch, len(nodes))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NumericalNonConvergenceError

# QUADPACK qk15 abscissae (descending, last one is the centre) and weights.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-point rule on [-1, 1].
NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes: +-x[1], +-x[3], +-x[5], 0.
for _i, _w in zip((1, 3, 5), _WG[:3]):
    GAUSS_WEIGHTS[_i] = _w
    GAUSS_WEIGHTS[14 - _i] = _w
GAUSS_WEIGHTS[7] = _WG[3]

EPS = np.finfo(float).eps


@dataclass
class QuadResult:
    value: np.ndarray      # (batch,)
    error: np.ndarray      # (batch,) sum of |K15 - G7| over intervals
    abs_integral: np.ndarray   # (batch,) integral of |f|, for roundoff bounds
    intervals: int


def rule_nodes(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Kronrod nodes for each interval, shape ``(n_intervals, 15)``."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return mid[:, None] + half[:, None] * NODES[None, :]


def gk15_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints,
    *,
    rtol: float = 1e-10,
    atol=0.0,
    batch: int = 1,
    max_intervals: int = 4000,
) -> QuadResult:
    """Integrate ``f`` over the union of intervals given by ``breakpoints``.

    ``atol`` may be a scalar or an array of per-member absolute tolerances.
    Convergence of member ``b`` means ``err[b] <= max(atol[b], rtol*|I[b]|)``,
    or that the error estimate has reached the roundoff floor.
    """
    bp = np.asarray(breakpoints, dtype=float)
    lo = bp[:-1].copy()
    hi = bp[1:].copy()
    atol = np.broadcast_to(np.asarray(atol, dtype=float), (batch,))

    kq = np.empty((batch, 0))
    gq = np.empty((batch, 0))
    aq = np.empty((batch, 0))
    ilo = np.empty(0)
    ihi = np.empty(0)

    new_lo, new_hi = lo, hi
    while True:
        x = rule_nodes(new_lo, new_hi)
        vals = np.asarray(f(x.ravel()), dtype=float).reshape(batch, *x.shape)
        half = 0.5 * (new_hi - new_lo)
        k_new = half * (vals @ KRONROD_WEIGHTS)
        g_new = half * (vals @ GAUSS_WEIGHTS)
        a_new = half * (np.abs(vals) @ KRONROD_WEIGHTS)
        if not np.all(np.isfinite(k_new)):
            raise NumericalNonConvergenceError("integrand produced non-finite values")

        kq = np.concatenate([kq, k_new], axis=1)
        gq = np.concatenate([gq, g_new], axis=1)
        aq = np.concatenate([aq, a_new], axis=1)
        ilo = np.concatenate([ilo, new_lo])
        ihi = np.concatenate([ihi, new_hi])

        err_i = np.abs(kq - gq)
        total = kq.sum(axis=1)
        err = err_i.sum(axis=1)
        absint = aq.sum(axis=1)
        floor = 50.0 * EPS * absint
        target = np.maximum(atol, rtol * np.abs(total))
        done = (err <= target) | (err <= floor)
        if np.all(done):
            return QuadResult(total, err, absint, len(ilo))

        n_int = len(ilo)
        if n_int >= max_intervals:
            raise NumericalNonConvergenceError(
                f"adaptive quadrature exceeded {max_intervals} intervals "
                f"(error {err.max():.3g}, target {target.min():.3g})"
            )
        # Bisect every interval that carries more than its share of some
        # unconverged member's error budget.
        share = np.maximum(target, floor)[:, None] / n_int
        split = np.any((err_i > share) & ~done[:, None], axis=0)
        if not np.any(split):
            split = np.any((err_i >= err_i.max(axis=1, keepdims=True)) & ~done[:, None], axis=0)
        keep = ~split
        mids = 0.5 * (ilo[split] + ihi[split])
        new_lo = np.concatenate([ilo[split], mids])
        new_hi = np.concatenate([mids, ihi[split]])
        kq, gq, aq = kq[:, keep], gq[:, keep], aq[:, keep]
        ilo, ihi = ilo[keep], ihi[keep]


def gk15_fixed(f: Callable[[np.ndarray], np.ndarray], lo, hi, batch: int = 1):
    """Single K15/G7 pass over given intervals. Returns (K, G, |f|) per interval."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    x = rule_nodes(lo, hi)
    vals = np.asarray(f(x.ravel()), dtype=float).reshape(batch, *x.shape)
    half = 0.5 * (hi - lo)
    return (half * (vals @ KRONROD_WEIGHTS), half * (vals @ GAUSS_WEIGHTS),
            half * (np.abs(vals) @ KRONROD_WEIGHTS))
