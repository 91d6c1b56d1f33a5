"""Extended bivariate Meijer-G function by double Mellin-Barnes quadrature.

With Mellin-Barnes kernels Phi_o, Phi_x, Phi_y built from three Meijer-G
parameter blocks,

    E(x, y) = (2 pi i)^-2 ∫∫ Phi_o(s + r) Phi_x(s) Phi_y(r) x^-s y^-r ds dr.

The contours are vertical lines Re s = c1 and Re r = c2 separating the pole
families of Phi_x and Phi_y, with c1 + c2 inside the separating strip of
Phi_o. A line may be moved across simple poles of Phi_x or Phi_y as long as
c1 + c2 never meets a pole of Phi_o; the residue terms collected on the way
are univariate Mellin-Barnes integrals of merged kernels.

The double integral is computed as nested adaptive Gauss-Kronrod: the inner
integral along the x contour is batched over the nodes of the outer integral
along the y contour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import AccuracyError, DomainError, NumericalNonConvergenceError
from ..quadrature import EPS, gk15_adaptive
from .meijer import Kernel, MeijerGSpec, contour_integral

_SUB = slice(2, None, 4)
_MARGIN = 1e-3


@dataclass(frozen=True)
class BivariateGSpec:
    """Parameter blocks of the coupling kernel and of the x and y kernels."""

    outer: MeijerGSpec
    x: MeijerGSpec
    y: MeijerGSpec

    def __post_init__(self):
        for name in ("outer", "x", "y"):
            if not isinstance(getattr(self, name), MeijerGSpec):
                raise DomainError(f"bivariate block {name!r} must be a MeijerGSpec")


def laplace_product_spec(x_spec: MeijerGSpec, y_spec: MeijerGSpec) -> BivariateGSpec:
    """Spec with E(x, y) = ∫_0^∞ e^{-t} G_x(x t) G_y(y t) dt.

    The t-integral of e^{-t} t^{-s-r} is Gamma(1 - s - r), i.e. a G^{0,1}_{1,0}
    coupling kernel.
    """
    return BivariateGSpec(MeijerGSpec(0, 1, (0.0,), ()), x_spec, y_spec)


def _kernel(spec: MeijerGSpec) -> Kernel:
    return Kernel.from_spec(spec)


def _natural_gap(kernel: Kernel, which: str):
    nat = [g for g in kernel.plan() if g.natural]
    if not nat:
        raise DomainError(f"{which} kernel has no strip separating its pole families")
    return nat[0]


def _clip_inside(c, lo, hi):
    lo_f = lo if math.isfinite(lo) else (hi - 50.0 if math.isfinite(hi) else -25.0)
    hi_f = hi if math.isfinite(hi) else lo_f + 50.0
    m = 0.02 * min(hi_f - lo_f, 1.0)
    return np.clip(c, lo_f + m, hi_f - m)


class _Plan:
    """Precomputed contour candidates for a bivariate spec."""

    def __init__(self, spec: BivariateGSpec):
        self.kx, self.ky, self.ko = _kernel(spec.x), _kernel(spec.y), _kernel(spec.outer)
        for k, which in ((self.kx, "x"), (self.ky, "y")):
            if k.decay <= 0:
                raise NumericalNonConvergenceError(f"{which} contour: kernel does not decay along the contour")
        if self.ko.decay < 0:
            raise NumericalNonConvergenceError("coupling kernel grows along the contours")
        self.nat_x = _natural_gap(self.kx, "x")
        self.nat_y = _natural_gap(self.ky, "y")
        self.o_lo, self.o_hi = self.ko.natural_strip() if self.ko.factors else (-math.inf, math.inf)

        self.pairs = []
        for gx in self.kx.plan():
            for gy in self.ky.plan():
                c1 = gx.c_grid[_SUB]
                c2 = gy.c_grid[_SUB]
                c1n = _clip_inside(c1, self.nat_x.lo, self.nat_x.hi)
                c2n = _clip_inside(c2, self.nat_y.lo, self.nat_y.hi)
                lo_sum = np.minimum(c1, c1n)[:, None] + np.minimum(c2, c2n)[None, :]
                hi_sum = np.maximum(c1, c1n)[:, None] + np.maximum(c2, c2n)[None, :]
                ok = (lo_sum > self.o_lo + _MARGIN) & (hi_sum < self.o_hi - _MARGIN)
                if not ok.any():
                    continue
                ho = self.ko.log_abs_real(c1[:, None] + c2[None, :]) if self.ko.factors else 0.0
                h0 = gx.h_grid[_SUB][:, None] + gy.h_grid[_SUB][None, :] + ho
                h0 = np.where(ok & np.isfinite(h0), h0, np.inf)
                if not np.isfinite(h0).any():
                    continue
                self.pairs.append((gx, gy, c1, c2, h0))
        if not self.pairs:
            raise DomainError("no contour pair keeps c1 + c2 inside the coupling strip")

    def choose(self, lnx: float, lny: float):
        best = None
        for gx, gy, c1, c2, h0 in self.pairs:
            h = h0 - c1[:, None] * lnx - c2[None, :] * lny
            i, j = np.unravel_index(np.argmin(h), h.shape)
            parts = [h[i, j]]
            if gx.res_log.size:
                parts.append(np.max(gx.res_log - gx.res_loc * lnx))
            if gy.res_log.size:
                parts.append(np.max(gy.res_log - gy.res_loc * lny))
            score = float(np.logaddexp.reduce(parts))
            if gx.natural and gy.natural:
                score -= math.log(4.0)
            if best is None or score < best[0]:
                best = (score, gx, gy, float(c1[i]), float(c2[j]))
        return best


_PLANS: dict = {}


def _plan(spec: BivariateGSpec) -> _Plan:
    p = _PLANS.get(spec)
    if p is None:
        p = _PLANS[spec] = _Plan(spec)
    return p


def _truncation(kernel: Kernel, c: float, lnz: float, rel: float, which: str) -> float:
    """Smallest T = 2^k with an exponential tail below ``rel`` times the peak."""
    peak = float((kernel.log_value(c + 0j) - c * lnz).real)
    T = 2.0
    for _ in range(16):
        s = c + 1j * T
        lf = float((kernel.log_value(s) - s * lnz).real)
        slope = -float(kernel.dlog_value(s).imag)
        if slope < -0.25 and lf - math.log(-slope) < peak + math.log(rel):
            return T
        T *= 2.0
    raise NumericalNonConvergenceError(f"{which} contour: truncation search did not converge")


def _double_line(plan: _Plan, c1: float, c2: float, lnx: float, lny: float, rtol: float):
    """(2 pi i)^-2 times the double line integral; returns (value, error)."""
    kx, ky, ko = plan.kx, plan.ky, plan.ko
    T1 = _truncation(kx, c1, lnx, 1e-3 * rtol, "x")
    T2 = _truncation(ky, c2, lny, 1e-3 * rtol, "y")
    co = c1 + c2

    def log_ax(t):
        s = c1 + 1j * t
        return kx.log_value(s) - s * lnx

    def log_ay(u):
        r = c2 + 1j * u
        return ky.log_value(r) - r * lny

    def log_o(w_im):
        if not ko.factors:
            return np.zeros(np.shape(w_im), dtype=complex)
        return ko.log_value(co + 1j * w_im)

    # Magnitude scale: integral of |f| over the rectangle is bounded by these.
    tx = np.linspace(-T1, T1, 401)
    ty = np.linspace(0.0, T2, 201)
    sx = np.trapezoid(np.exp(log_ax(tx).real), tx)
    sy = np.trapezoid(np.exp(log_ay(ty).real), ty)
    o_peak = float(np.exp(log_o(np.zeros(1)).real)[0])
    scale = sx * sy * max(o_peak, 1e-300)
    inner_scale = 1e-2 * rtol * sx * max(o_peak, 1e-300)

    bx = sorted({-T1, T1, 0.0, *[v for k in range(12) for v in (0.25 * 2**k, -0.25 * 2**k) if 0.25 * 2**k < T1]})
    by = [0.0] + [0.25 * 2**k for k in range(12) if 0.25 * 2**k < T2] + [T2]

    def outer_integrand(u):
        lay = log_ay(u)

        def inner(t):
            lax = log_ax(t)
            lo = log_o(t[None, :] + u[:, None])
            return np.exp(lay[:, None] + lax[None, :] + lo).real

        try:
            q = gk15_adaptive(inner, bx, rtol=rtol, atol=inner_scale * np.exp(lay.real), batch=u.size)
        except NumericalNonConvergenceError as exc:
            raise NumericalNonConvergenceError(f"x contour: {exc}") from exc
        return np.stack([q.value, q.error, q.abs_integral])

    try:
        outer = gk15_adaptive(outer_integrand, by, rtol=rtol,
                              atol=np.array([1e-3 * rtol * scale, np.inf, np.inf]), batch=3)
    except NumericalNonConvergenceError as exc:
        if str(exc).startswith("x contour"):
            raise
        raise NumericalNonConvergenceError(f"y contour: {exc}") from exc

    norm = 1.0 / (2.0 * math.pi**2)
    value = norm * outer.value[0]
    absint = outer.value[2]
    cond = (np.abs(kx.log_value_cond(c1 + 0j)[1]) + np.abs(ky.log_value_cond(c2 + 0j)[1])
            + (ko.log_value_cond(co + 0j)[1] if ko.factors else 0.0)
            + abs(c1 * lnx) + abs(c2 * lny) + T1 * abs(lnx) + T2 * abs(lny) + 8.0)
    error = norm * (outer.error[0] + abs(outer.value[1]) + EPS * float(cond) * absint
                    + 4e-3 * rtol * scale)
    return float(value), float(error)


def _merged_value(kernel: Kernel, z: float, rtol: float, which: str):
    try:
        r = contour_integral(kernel, z, rtol=rtol)
    except NumericalNonConvergenceError as exc:
        raise NumericalNonConvergenceError(f"{which} contour (residue term): {exc}") from exc
    return float(r.value[0]), float(r.error[0])


def bivariate_meijer_g_with_error(spec: BivariateGSpec, x: float, y: float, *,
                                  rtol: float = 1e-8, guarantee: float = 1e-6):
    """Evaluate E(x, y) and an error bound; raise AccuracyError past ``guarantee``."""
    x, y = float(x), float(y)
    if not (x > 0 and y > 0):
        raise DomainError("bivariate Meijer-G arguments must be positive")
    plan = _plan(spec)
    lnx, lny = math.log(x), math.log(y)
    _, gx, gy, c1, c2 = plan.choose(lnx, lny)

    value, error = _double_line(plan, c1, c2, lnx, lny, rtol)
    terms = [value]

    # Residues collected while moving the y line off its natural position.
    ry = [(loc, sg * math.exp(lg - loc * lny)) for loc, lg, sg in zip(gy.res_loc, gy.res_log, gy.res_sign)]
    for rk, wk in ry:
        ux, ex = _merged_value(plan.kx * plan.ko.shifted(rk), x, rtol, "x")
        terms.append(wk * ux)
        error += abs(wk) * ex + EPS * abs(wk * ux) * (abs(rk * lny) + 8.0)

    # Residues from moving the x line; the y integral they multiply runs
    # along the shifted y line, hence the correction by the y residues.
    for sj, lg, sg in zip(gx.res_loc, gx.res_log, gx.res_sign):
        wj = sg * math.exp(lg - sj * lnx)
        uy, ey = _merged_value(plan.ky * plan.ko.shifted(sj), y, rtol, "y")
        corr = 0.0
        for rk, wk in ry:
            phi_o = float(np.exp(plan.ko.log_value(complex(sj + rk))).real) if plan.ko.factors else 1.0
            corr += wk * phi_o
        terms.append(wj * (uy - corr))
        error += abs(wj) * ey + EPS * abs(wj) * (abs(uy) + abs(corr)) * (abs(sj * lnx) + 8.0)

    total = math.fsum(terms)
    error += EPS * sum(abs(t) for t in terms)
    if error > guarantee * abs(total):
        raise AccuracyError(
            f"bivariate Meijer-G at (x={x!r}, y={y!r}): error bound {error:.3g} exceeds "
            f"{guarantee:g} relative to {total:.6g}", value=total, error=error,
        )
    return total, error


def bivariate_meijer_g(spec: BivariateGSpec, x: float, y: float, **kw) -> float:
    """Extended bivariate Meijer-G E(x, y) for x, y > 0."""
    return bivariate_meijer_g_with_error(spec, x, y, **kw)[0]
