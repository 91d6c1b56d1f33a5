"""Meijer-G evaluation by Mellin-Barnes contour quadrature.

The Mellin-Barnes kernel

    Phi(s) = prod Gamma(b_j + s) prod Gamma(1 - a_j - s)
             / (prod Gamma(1 - b_j - s) prod Gamma(a_j + s))

is held as a list of factors ``Gamma(e + sigma*s)**power`` and
``(e + sigma*s)**power``. Gamma pairs whose arguments differ by an integer are
reduced to rational factors before evaluation, which keeps large parameters
(xi^2 ~ 100) from costing precision.

The integral runs along a vertical line Re(s) = c. The line is placed in the
gap between real poles that minimises the magnitude of the work: either the
natural strip separating the two pole families or a neighbouring gap, in which
case the residues of the crossed (simple) poles are added back exactly. This
is the residue form of indenting the contour around those poles.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sc

from ..errors import AccuracyError, DomainError, NumericalNonConvergenceError
from ..quadrature import EPS, gk15_adaptive

_INT_TOL = 1e-11
_MAX_PAIR_SHIFT = 64
_MAX_CROSSED = 6
_GRID = 160
_SPAN = 60.0
# Results below this magnitude are only resolved in absolute terms; they are
# indistinguishable from underflow in every downstream use.
TINY = 1e-280


@dataclass(frozen=True)
class MeijerGSpec:
    """Orders and parameters of G^{m,n}_{p,q}(z | a; b)."""

    m: int
    n: int
    a: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not (0 <= self.m <= len(b)):
            raise DomainError(f"need 0 <= m <= q, got m={self.m}, q={len(b)}")
        if not (0 <= self.n <= len(a)):
            raise DomainError(f"need 0 <= n <= p, got n={self.n}, p={len(a)}")
        if not all(math.isfinite(x) for x in a + b):
            raise DomainError("Meijer-G parameters must be finite")
        for ak in a[: self.n]:
            for bj in b[: self.m]:
                d = ak - bj
                r = round(d)
                if r >= 1 and abs(d - r) <= _INT_TOL * max(1.0, abs(ak), abs(bj)):
                    raise DomainError(
                        f"pole collision: a={ak!r} and b={bj!r} differ by the positive integer {r}"
                    )

    @property
    def p(self) -> int:
        return len(self.a)

    @property
    def q(self) -> int:
        return len(self.b)

    def __str__(self):
        return f"G^{{{self.m},{self.n}}}_{{{self.p},{self.q}}}(a={list(self.a)}, b={list(self.b)})"


@dataclass(frozen=True)
class Factor:
    """``Gamma(shift + sign*s)**power`` if ``gamma`` else ``(shift + sign*s)**power``."""

    shift: float
    sign: int
    power: int
    gamma: bool = True

    def shifted(self, w0: float) -> "Factor":
        """Same factor with s replaced by s + w0."""
        return Factor(self.shift + self.sign * w0, self.sign, self.power, self.gamma)


@dataclass(frozen=True)
class Pole:
    loc: float
    family: int     # +1: must lie left of the contour, -1: right of it
    order: int


@dataclass
class _Gap:
    lo: float
    hi: float
    natural: bool
    crossed: list            # poles whose residues are added back
    res_log: np.ndarray      # log|residue| without the z**(-s0) factor
    res_sign: np.ndarray     # sign incl. the family orientation
    res_cond: np.ndarray     # sum of |log terms| at the pole (roundoff)
    res_loc: np.ndarray
    c_grid: np.ndarray = field(default_factory=lambda: np.empty(0))
    h_grid: np.ndarray = field(default_factory=lambda: np.empty(0))


def _near_int(x: float) -> int | None:
    r = round(x)
    return int(r) if abs(x - r) <= _INT_TOL * max(1.0, abs(x)) else None


def _paired_factors(spec: MeijerGSpec) -> list[Factor]:
    a, b, m, n = spec.a, spec.b, spec.m, spec.n
    groups = [
        (list(b[:m]), list(a[n:]), +1),
        ([1.0 - x for x in a[:n]], [1.0 - x for x in b[m:]], -1),
    ]
    out: list[Factor] = []
    for num, den, sigma in groups:
        den = list(den)
        for x in num:
            best = None
            for j, y in enumerate(den):
                d = y - x
                r = round(d)
                if abs(d - r) <= _INT_TOL * max(1.0, abs(x), abs(y)) and abs(r) <= _MAX_PAIR_SHIFT:
                    if best is None or abs(r) < abs(best[1]):
                        best = (j, int(r))
            if best is None:
                out.append(Factor(x, sigma, +1))
                continue
            j, n0 = best
            y = den.pop(j)
            if n0 >= 0:
                out.extend(Factor(x + i, sigma, -1, gamma=False) for i in range(n0))
            else:
                out.extend(Factor(y + i, sigma, +1, gamma=False) for i in range(-n0))
        out.extend(Factor(y, sigma, -1) for y in den)
    return out


class Kernel:
    """A Mellin-Barnes integrand Phi(s) as a product of factors."""

    def __init__(self, factors):
        self.factors = tuple(factors)
        g = [f for f in self.factors if f.gamma]
        lin = [f for f in self.factors if not f.gamma]
        self._ge = np.array([f.shift for f in g], dtype=float)
        self._gs = np.array([f.sign for f in g], dtype=float)
        self._gp = np.array([f.power for f in g], dtype=float)
        self._le = np.array([f.shift for f in lin], dtype=float)
        self._ls = np.array([f.sign for f in lin], dtype=float)
        self._lp = np.array([f.power for f in lin], dtype=float)
        self._plan = None

    @classmethod
    def from_spec(cls, spec: MeijerGSpec) -> "Kernel":
        return _kernel_for_spec(spec)

    def shifted(self, w0: float) -> "Kernel":
        return Kernel(f.shifted(w0) for f in self.factors)

    def __mul__(self, other: "Kernel") -> "Kernel":
        return Kernel(self.factors + other.factors)

    @property
    def decay(self) -> float:
        """Exponential decay rate of |Phi(c + it)| in |t|."""
        return 0.5 * math.pi * float(self._gp.sum())

    # -- evaluation -------------------------------------------------------
    def _gamma_args(self, s):
        s = np.asarray(s)
        return self._ge.reshape((-1,) + (1,) * s.ndim) + self._gs.reshape((-1,) + (1,) * s.ndim) * s

    def _lin_args(self, s):
        s = np.asarray(s)
        return self._le.reshape((-1,) + (1,) * s.ndim) + self._ls.reshape((-1,) + (1,) * s.ndim) * s

    def log_value(self, s) -> np.ndarray:
        """Complex log Phi(s) (branch irrelevant after exponentiation)."""
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape, dtype=complex)
        if self._ge.size:
            out = out + np.tensordot(self._gp, sc.loggamma(self._gamma_args(s)), axes=(0, 0))
        if self._le.size:
            out = out + np.tensordot(self._lp, np.log(self._lin_args(s)), axes=(0, 0))
        return out

    def log_value_cond(self, s):
        """(log Phi(s), sum of |log factor|) for roundoff accounting."""
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape, dtype=complex)
        cond = np.zeros(s.shape)
        if self._ge.size:
            lg = sc.loggamma(self._gamma_args(s))
            out = out + np.tensordot(self._gp, lg, axes=(0, 0))
            cond = cond + np.abs(lg).sum(axis=0)
        if self._le.size:
            ll = np.log(self._lin_args(s))
            out = out + np.tensordot(self._lp, ll, axes=(0, 0))
            cond = cond + np.abs(ll).sum(axis=0)
        return out, cond

    def dlog_value(self, s) -> np.ndarray:
        """d/ds log Phi(s)."""
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape, dtype=complex)
        if self._ge.size:
            out = out + np.tensordot(self._gp * self._gs, sc.psi(self._gamma_args(s)), axes=(0, 0))
        if self._le.size:
            out = out + np.tensordot(self._lp * self._ls, 1.0 / self._lin_args(s), axes=(0, 0))
        return out

    def log_abs_real(self, c) -> np.ndarray:
        """log|Phi(c)| for real c (+inf at poles)."""
        c = np.asarray(c, dtype=float)
        out = np.zeros(c.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self._ge.size:
                out = out + np.tensordot(self._gp, sc.gammaln(self._gamma_args(c)), axes=(0, 0))
            if self._le.size:
                out = out + np.tensordot(self._lp, np.log(np.abs(self._lin_args(c))), axes=(0, 0))
        return np.where(np.isnan(out), np.inf, out)

    # -- pole structure -----------------------------------------------------
    def _pole_factors(self):
        return [f for f in self.factors if (f.power > 0) == f.gamma]

    def _zero_order(self, loc: float) -> int:
        """Order of the zero of Phi contributed at ``loc`` by 1/Gamma and linear factors."""
        order = 0
        for f in self.factors:
            if (f.power > 0) == f.gamma:
                continue
            arg = f.shift + f.sign * loc
            if f.gamma:
                k = _near_int(-arg)
                if k is not None and k >= 0:
                    order += abs(f.power)
            elif abs(arg) <= _INT_TOL * max(1.0, abs(loc)) + 1e-14:
                order += abs(f.power)
        return order

    def poles(self, lo: float, hi: float) -> list[Pole]:
        """Net poles (after cancellation against zeros) in [lo, hi]."""
        events = []   # (loc, family, multiplicity)
        for f in self._pole_factors():
            start = -f.sign * f.shift
            if f.gamma:
                if f.sign > 0:
                    k0, k1 = max(0, math.ceil(start - hi - 1e-9)), math.floor(start - lo + 1e-9)
                else:
                    k0, k1 = max(0, math.ceil(lo - start - 1e-9)), math.floor(hi - start + 1e-9)
                if k1 - k0 > 100_000:
                    raise DomainError("pole enumeration window is too wide")
                locs = [start - f.sign * k for k in range(k0, k1 + 1)]
            else:
                locs = [start] if lo - 1e-9 <= start <= hi + 1e-9 else []
            events.extend((x, f.sign, abs(f.power)) for x in locs)
        events.sort()
        poles: list[Pole] = []
        i = 0
        while i < len(events):
            j = i
            loc = events[i][0]
            while j < len(events) and abs(events[j][0] - loc) <= 1e-12 * max(1.0, abs(loc)) + 1e-14:
                j += 1
            left = sum(w for _, fam, w in events[i:j] if fam > 0)
            right = sum(w for _, fam, w in events[i:j] if fam < 0)
            if left and right:
                raise DomainError(f"pole families collide at s={loc!r}")
            net = left + right - self._zero_order(loc)
            if net > 0:
                poles.append(Pole(loc, 1 if left else -1, net))
            i = j
        return poles

    def _windows(self):
        """Intervals holding every pole that can matter for contour placement."""
        pf = self._pole_factors()
        left = [-f.shift for f in pf if f.sign > 0]
        right = [f.shift for f in pf if f.sign < 0]
        anchors = ([max(left)] if left else []) + ([min(right)] if right else []) or [0.0]
        lo, hi = min(anchors), max(anchors)
        wins = [(lo - 13.0, hi + 13.0)] if hi - lo <= 120.0 else [(lo - 13.0, lo + 13.0), (hi - 13.0, hi + 13.0)]
        wins += [(-f.sign * f.shift - 1.0, -f.sign * f.shift + 1.0) for f in pf if not f.gamma]
        return wins

    def window_poles(self) -> list[Pole]:
        found = {}
        for lo, hi in self._windows():
            for p in self.poles(lo, hi):
                found[p.loc] = p
        return sorted(found.values(), key=lambda p: p.loc)

    def has_left_sequence(self) -> bool:
        return any(f.gamma and f.power > 0 and f.sign > 0 for f in self.factors)

    def has_right_sequence(self) -> bool:
        return any(f.gamma and f.power > 0 and f.sign < 0 for f in self.factors)

    def residue(self, s0: float):
        """Residue of Phi at a simple pole s0: returns (log|R|, sign, cond)."""
        logmag, sign, order, cond = 0.0, 1.0, 0, 0.0
        for f in self.factors:
            arg = f.shift + f.sign * s0
            if f.gamma:
                k = _near_int(-arg)
                if k is not None and k >= 0:
                    lk = math.lgamma(k + 1)
                    logmag += -lk if f.power > 0 else lk
                    sign *= (-1.0) ** k * f.sign
                    order += -1 if f.power > 0 else 1
                    cond += lk
                else:
                    lg = math.lgamma(arg)
                    logmag += f.power * lg
                    sign *= sc.gammasgn(arg)
                    cond += abs(lg)
            else:
                if abs(arg) <= _INT_TOL * max(1.0, abs(s0)):
                    sign *= f.sign
                    order += f.power
                else:
                    logmag += f.power * math.log(abs(arg))
                    sign *= math.copysign(1.0, arg)
                    cond += abs(math.log(abs(arg)))
        if order != -1:
            raise DomainError(f"s={s0!r} is not a simple pole (order {-order})")
        return logmag, sign, cond

    def natural_strip(self):
        ps = self.window_poles()
        left = [p.loc for p in ps if p.family > 0]
        right = [p.loc for p in ps if p.family < 0]
        return (max(left) if left else -math.inf, min(right) if right else math.inf)

    # -- contour planning -----------------------------------------------------
    def plan(self) -> list[_Gap]:
        if self._plan is None:
            self._plan = self._build_plan()
        return self._plan

    def _build_plan(self) -> list[_Gap]:
        ps = self.window_poles()
        locs = [p.loc for p in ps]
        lo_nat, hi_nat = self.natural_strip()

        bounds = []
        if not self.has_left_sequence():
            bounds.append((-math.inf, locs[0] if locs else math.inf))
        bounds.extend(zip(locs[:-1], locs[1:]))
        if not self.has_right_sequence() and locs:
            bounds.append((locs[-1], math.inf))

        gaps = []
        for lo, hi in bounds:
            crossed = [p for p in ps if (p.family > 0 and p.loc >= hi) or (p.family < 0 and p.loc <= lo)]
            if len(crossed) > _MAX_CROSSED or any(p.order > 1 for p in crossed):
                continue
            natural = not crossed and lo >= lo_nat and hi <= hi_nat
            res = [self.residue(p.loc) for p in crossed]
            gap = _Gap(
                lo, hi, natural, crossed,
                res_log=np.array([r[0] for r in res]),
                res_sign=np.array([r[1] * p.family for r, p in zip(res, crossed)]),
                res_cond=np.array([r[2] for r in res]),
                res_loc=np.array([p.loc for p in crossed]),
            )
            glo = lo if math.isfinite(lo) else (hi - _SPAN if math.isfinite(hi) else -_SPAN / 2)
            ghi = hi if math.isfinite(hi) else glo + _SPAN
            u = (np.arange(_GRID) + 0.5) / _GRID
            grid = glo + (ghi - glo) * 0.5 * (1.0 - np.cos(np.pi * u))
            # Unbounded sides get far points so the saddle can follow z.
            far = _SPAN * 2.0 ** np.arange(1, 10)
            if not math.isfinite(lo):
                grid = np.concatenate([ghi - far[::-1], grid])
            if not math.isfinite(hi):
                grid = np.concatenate([grid, glo + far])
            gap.c_grid = grid
            gap.h_grid = self.log_abs_real(gap.c_grid)
            if np.all(~np.isfinite(gap.h_grid)):
                continue
            gaps.append(gap)
        if not gaps:
            raise DomainError("no admissible contour: crossed poles are multiple or too many")
        return gaps


@functools.lru_cache(maxsize=512)
def _kernel_for_spec(spec: MeijerGSpec) -> Kernel:
    return Kernel(_paired_factors(spec))


@dataclass
class ContourResult:
    value: np.ndarray
    error: np.ndarray


def _choose_contours(kernel: Kernel, lnz: np.ndarray):
    """Per-z best gap: returns (gap index, c, log-magnitude score)."""
    gaps = kernel.plan()
    nz = lnz.size
    best_score = np.full(nz, np.inf)
    best_gap = np.zeros(nz, dtype=int)
    best_c = np.zeros(nz)
    best_lo = np.zeros(nz)
    best_hi = np.zeros(nz)
    for gi, gap in enumerate(gaps):
        h = gap.h_grid[None, :] - gap.c_grid[None, :] * lnz[:, None]
        j = np.argmin(h, axis=1)
        hmin = h[np.arange(nz), j]
        last = gap.c_grid.size - 1
        lo_b = gap.c_grid[np.maximum(j - 1, 0)]
        hi_b = gap.c_grid[np.minimum(j + 1, last)]
        parts = [hmin]
        if gap.res_log.size:
            parts.append(np.max(gap.res_log[None, :] - gap.res_loc[None, :] * lnz[:, None], axis=1))
        score = np.logaddexp.reduce(np.stack(parts), axis=0)
        if gap.natural:
            score = score - math.log(4.0)
        better = score < best_score
        best_score = np.where(better, score, best_score)
        best_gap = np.where(better, gi, best_gap)
        best_c = np.where(better, gap.c_grid[j], best_c)
        best_lo = np.where(better, lo_b, best_lo)
        best_hi = np.where(better, hi_b, best_hi)
    best_c = _refine_saddle(kernel, lnz, best_c, best_lo, best_hi)
    return best_gap, best_c, best_score


def _refine_saddle(kernel: Kernel, lnz, c, lo, hi, iters: int = 40):
    """Golden-section refinement of argmin log|Phi(c)| - c ln z inside [lo, hi]."""
    def h(x):
        return kernel.log_abs_real(x) - x * lnz

    g = 0.5 * (math.sqrt(5.0) - 1.0)
    a, b = lo.copy(), hi.copy()
    x1 = b - g * (b - a)
    x2 = a + g * (b - a)
    f1, f2 = h(x1), h(x2)
    for _ in range(iters):
        left = f1 < f2
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        x2n = np.where(left, x1, a + g * (b - a))
        x1n = np.where(left, b - g * (b - a), x2)
        f1, f2 = np.where(left, np.nan, f2), np.where(left, f1, np.nan)
        x1, x2 = x1n, x2n
        f1 = np.where(np.isnan(f1), h(x1), f1)
        f2 = np.where(np.isnan(f2), h(x2), f2)
    cand = 0.5 * (a + b)
    ok = np.isfinite(h(cand)) & (h(cand) <= h(c))
    return np.where(ok, cand, c)


def contour_integral(kernel: Kernel, z, *, rtol: float = 1e-10, max_doublings: int = 8) -> ContourResult:
    """(1/2 pi i) * integral of Phi(s) z**(-s) ds over the separating contour.

    Returns values and error bounds (quadrature + truncation + roundoff).
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(~(z > 0)):
        raise DomainError("Meijer-G argument must be positive")
    if kernel.decay <= 0:
        raise NumericalNonConvergenceError(
            "Mellin-Barnes integrand does not decay along vertical lines (m+n-(p+q)/2 <= 0)"
        )
    lnz = np.log(z)
    gi, c, score = _choose_contours(kernel, lnz)
    gaps = kernel.plan()

    res_val = np.zeros(z.size)
    res_err = np.zeros(z.size)
    for g_idx in np.unique(gi):
        gap = gaps[g_idx]
        if not gap.res_log.size:
            continue
        sel = gi == g_idx
        lr = gap.res_log[None, :] - gap.res_loc[None, :] * lnz[sel, None]
        terms = gap.res_sign[None, :] * np.exp(lr)
        res_val[sel] = terms.sum(axis=1)
        cond = gap.res_cond[None, :] + np.abs(gap.res_loc[None, :] * lnz[sel, None]) + 4.0
        res_err[sel] = (EPS * cond * np.abs(terms)).sum(axis=1)

    # Truncation: grow T until the local exponential-tail estimate is small
    # relative to the expected magnitude of the result.
    target_tail = np.maximum(1e-3 * rtol * np.exp(score) * math.pi, TINY)
    T = np.full(z.size, 2.0)
    for _ in range(16):
        s = c + 1j * T
        lf = (kernel.log_value(s) - s * lnz).real
        slope = -kernel.dlog_value(s).imag
        ok = (slope < -0.25) & (lf - np.log(np.maximum(-slope, 1e-300)) < np.log(target_tail))
        if np.all(ok):
            break
        T = np.where(ok, T, 2.0 * T)
    t_max = float(T.max())

    atol = np.maximum(rtol * math.pi * np.abs(res_val), TINY)
    nz = z.size

    # Members nz..2nz-1 carry |f| times the per-node condition number, so the
    # roundoff bound weights each node's conditioning by its own magnitude.
    # They only ride along on the partition chosen for the value rows.
    def integrand(t):
        s = c[:, None] + 1j * np.asarray(t)[None, :]
        lv, cnd = kernel.log_value_cond(s)
        f = np.exp(lv - s * lnz[:, None])
        cnd = cnd + np.abs(s * lnz[:, None]) + 4.0
        return np.concatenate([f.real, np.abs(f) * cnd])

    loose = np.concatenate([atol, np.full(nz, np.inf)])

    def run(bps):
        q = gk15_adaptive(integrand, bps, rtol=rtol, atol=loose, batch=2 * nz)
        # The K15 estimate of the conditioning integral is inflated by its own
        # error estimate to keep the roundoff term an upper bound.
        return q.value[:nz], q.error[:nz], q.value[nz:] + q.error[nz:]

    bps = [0.0] + [x for x in (0.25 * 2.0**k for k in range(40)) if x < t_max] + [t_max]
    line, qerr, condint = run(bps)

    for attempt in range(max_doublings + 1):
        s = c + 1j * t_max
        lf = (kernel.log_value(s) - s * lnz).real
        slope = -kernel.dlog_value(s).imag
        tail = np.where(slope < 0, np.exp(lf) / np.maximum(-slope, 1e-300), np.inf)
        scale = np.abs(line / math.pi + res_val)
        if np.all(tail <= np.maximum(1e-3 * rtol * math.pi * scale, TINY)):
            break
        if attempt == max_doublings:
            raise NumericalNonConvergenceError(
                f"contour truncation did not converge after {max_doublings} doublings (T={t_max})"
            )
        v, e, ci = run([t_max, 2 * t_max])
        line, qerr, condint = line + v, qerr + e, condint + ci
        t_max *= 2

    roundoff = EPS * condint / math.pi + res_err
    value = line / math.pi + res_val
    error = qerr / math.pi + tail / math.pi + roundoff
    return ContourResult(value, error)


def meijer_g_with_error(spec: MeijerGSpec, z, *, rtol: float = 1e-10, guarantee: float = 1e-8,
                        abs_tol: float = 0.0):
    """Evaluate G and an error bound. Raises AccuracyError if the bound misses ``guarantee``."""
    scalar = np.ndim(z) == 0
    kernel = _kernel_for_spec(spec)
    res = contour_integral(kernel, z, rtol=rtol)
    bad = res.error > np.maximum(guarantee * np.abs(res.value), max(abs_tol, TINY))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise AccuracyError(
            f"{spec} at z={np.atleast_1d(z)[i]!r}: error bound {res.error[i]:.3g} "
            f"exceeds {guarantee:g} relative to {res.value[i]:.6g}",
            value=res.value[i], error=res.error[i],
        )
    if scalar:
        return float(res.value[0]), float(res.error[0])
    return res.value.reshape(np.shape(z)), res.error.reshape(np.shape(z))


def meijer_g(spec: MeijerGSpec, z, **kw):
    """G^{m,n}_{p,q}(z | a; b) for z > 0 (scalar or array)."""
    return meijer_g_with_error(spec, z, **kw)[0]


def residue_series(spec: MeijerGSpec, z: float, *, max_terms: int = 2000, tol: float = 1e-17) -> float:
    """Sum of residues at the left poles; a cross-check valid for p < q.

    Requires the left poles to be simple (no two b_j, j <= m, differing by an
    integer).
    """
    if spec.p >= spec.q:
        raise DomainError("residue series cross-check requires p < q")
    kernel = _kernel_for_spec(spec)
    if kernel.decay <= 0:
        raise NumericalNonConvergenceError("residue series requires a convergent kernel")
    lnz = math.log(z)
    starts = [-f.shift for f in kernel.factors if f.sign > 0 and ((f.power > 0) == f.gamma)]
    total, tiny_run, terms = 0.0, 0, []
    hi = max(starts)
    step = 0
    while step < max_terms:
        lo = hi - 1.0
        block = [p for p in kernel.poles(lo, hi) if p.family > 0 and p.loc <= hi and p.loc > lo]
        for p in block:
            if p.order != 1:
                raise DomainError("residue series needs simple left poles")
            lg, sg, _ = kernel.residue(p.loc)
            terms.append(sg * math.exp(lg - p.loc * lnz))
        total = math.fsum(terms)
        recent = max((abs(t) for t in terms[-len(block):]), default=0.0) if block else 0.0
        tiny_run = tiny_run + 1 if recent <= tol * max(abs(total), 1e-300) else 0
        if tiny_run >= 3 and step > 2:
            break
        hi = lo
        step += 1
    return total
