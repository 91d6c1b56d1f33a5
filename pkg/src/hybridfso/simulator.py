"""Semi-analytic Monte Carlo for the relay-assisted hybrid link.

Each trial draws the first-hop SNR (best of N Rayleigh users) and both
second-hop SNRs, forms the end-to-end SNR of the configured scheme and
records the outage indicator and the conditional DPSK error ½ e^{-g}.

At high SNR the AF error rate is carried by joint deep fades that plain
sampling essentially never sees (about 1e-12 at 30 dB with four users).
AF BER therefore defaults to a defensive importance-sampling mixture: each
group of variates (the users of either branch, the RF second hop, the
smaller-shape Gamma factor of the FSO hop) is drawn with probability ½
from its nominal law and ½ divided by a log-uniform random scale, which
covers every fade depth down to the one that matters at that SNR. Every
group weight is at most 2, so the estimator is unbiased and its variance
never exceeds 16 times the plain one. Outage always uses plain draws.

Trials are split into fixed-size batches. Batch ``b`` draws from its own
Philox stream seeded by ``SeedSequence(seed, spawn_key=(*stream, b))`` and
returns integer counts plus (n, mean, M2) moments. Batch summaries are
combined in batch order, so every estimate is bit-identical regardless of
how many worker processes ran the batches.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit, gammainc, gammaincc, gammaln

from . import channels
from .analytic import Scheme, SystemConfig
from .errors import DomainError

__all__ = [
    "FirstHop", "Hop", "BerSampling", "RunPlan", "EstimateCI", "draw_equivalent_snr", "simulate",
    "estimate_outage", "estimate_ber", "empirical_hop_cdf",
]

DEFAULT_BATCH = 2 ** 16


class FirstHop(enum.Enum):
    """How the two AF branches see the access hop."""

    INDEPENDENT = "independent"   # each branch draws its own best-user SNR
    SHARED = "shared"             # one best-user SNR feeds both branches


class BerSampling(enum.Enum):
    """How BER trials are drawn."""

    AUTO = "auto"           # mixture for AF, plain for DF
    PLAIN = "plain"         # nominal draws, shared with the outage estimate
    MIXTURE = "mixture"     # defensive importance-sampling mixture


class Hop(enum.Enum):
    ACCESS_POINT = "AccessPoint"
    FSO_BRANCH = "FsoBranch"
    RF_BRANCH = "RfBranch"
    END_TO_END = "EndToEnd"


@dataclass(frozen=True)
class RunPlan:
    """A Monte Carlo run. ``trials`` is padded up to a whole number of batches."""

    config: SystemConfig
    trials: int
    seed: int
    batch_size: int = DEFAULT_BATCH
    stream: tuple = ()
    first_hop: FirstHop = FirstHop.INDEPENDENT
    ideal_second_hop: bool = False
    ber_sampling: BerSampling = BerSampling.AUTO
    requested_trials: int = field(init=False)

    def __post_init__(self):
        for name in ("trials", "batch_size"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v!r}")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"seed must be an integer in [0, 2^64), got {self.seed!r}")
        if any(int(k) != k or k < 0 for k in self.stream):
            raise DomainError(f"stream keys must be nonnegative integers, got {self.stream!r}")
        trials, batch = int(self.trials), int(self.batch_size)
        batch = min(batch, trials)
        object.__setattr__(self, "requested_trials", trials)
        object.__setattr__(self, "batch_size", batch)
        object.__setattr__(self, "trials", -(-trials // batch) * batch)
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "stream", tuple(int(k) for k in self.stream))
        object.__setattr__(self, "first_hop", FirstHop(self.first_hop))
        object.__setattr__(self, "ber_sampling", BerSampling(self.ber_sampling))
        if self.ideal_second_hop and self.ber_sampling is BerSampling.MIXTURE:
            raise DomainError("the BER mixture needs a random second hop")

    @property
    def ber_mixture(self) -> bool:
        """True when BER trials come from the importance-sampling mixture."""
        if self.ber_sampling is BerSampling.AUTO:
            return self.config.scheme is Scheme.UNKNOWN_CSI_AF and not self.ideal_second_hop
        return self.ber_sampling is BerSampling.MIXTURE

    @property
    def n_batches(self) -> int:
        return self.trials // self.batch_size

    @property
    def padding(self) -> int:
        """Trials added to fill the last batch."""
        return self.trials - self.requested_trials

    def rng(self, batch: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream + (int(batch),))
        return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class EstimateCI:
    """A Monte Carlo estimate with its standard error.

    ``events`` is the indicator count for outage estimates (None for BER).
    """

    value: float
    stderr: float
    trials: int
    events: Optional[int] = None

    @property
    def zero_count(self) -> bool:
        return self.events == 0

    @property
    def full_count(self) -> bool:
        return self.events is not None and self.events == self.trials

    def interval(self, z: float = 1.96) -> tuple[float, float]:
        """Normal-approximation interval; [0, 3/n] when no event was seen."""
        if self.zero_count:
            return 0.0, 3.0 / self.trials
        if self.full_count:
            return 1.0 - 3.0 / self.trials, 1.0
        lo = max(0.0, self.value - z * self.stderr)
        hi = min(1.0, self.value + z * self.stderr)
        return lo, hi

    def agrees_with(self, reference: float, k: float = 3.0) -> bool:
        """|reference - value| <= k stderr, with the 3/n rule for degenerate counts."""
        if self.zero_count:
            return reference <= 3.0 / self.trials
        if self.full_count:
            return 1.0 - reference <= 3.0 / self.trials
        return abs(reference - self.value) <= k * self.stderr


# -- draws --------------------------------------------------------------------

def _first_hop(cfg: SystemConfig, rng, size):
    return channels.sample_max_user_snr(channels.RfParams(cfg.mean_snr_rf), cfg.n_users, rng, size)


def _second_hop(cfg: SystemConfig, rng, size):
    g_fso = channels.sample_fso_snr(cfg.effective_mean_snr_fso, cfg.turbulence, rng, size)
    g_rf = channels.sample_rf_snr(channels.RfParams(cfg.mean_snr_rf), rng, size)
    return g_fso, g_rf


def _draw_hops(cfg: SystemConfig, rng, size, first_hop: FirstHop, ideal_second_hop: bool):
    """(g1 for the FSO branch, g1 for the RF branch, g2_fso, g2_rf)."""
    g1 = _first_hop(cfg, rng, size)
    if cfg.scheme is Scheme.UNKNOWN_CSI_AF and first_hop is FirstHop.INDEPENDENT:
        g1_rf = _first_hop(cfg, rng, size)
    else:
        g1_rf = g1
    if ideal_second_hop:
        inf = np.full(np.shape(g1), np.inf)
        return g1, g1_rf, inf, inf
    g_fso, g_rf = _second_hop(cfg, rng, size)
    return g1, g1_rf, g_fso, g_rf


def _af_ratio(g1, g2, c):
    # g1 g2 / (g2 + C), written to stay finite for an ideal (infinite) g2;
    # g2 = 0 gives C / g2 = inf and the correct limit 0.
    with np.errstate(divide="ignore"):
        return g1 / (1.0 + c / g2)


def _equivalent(cfg: SystemConfig, hops):
    g1, g1_rf, g_fso, g_rf = hops
    if cfg.scheme is Scheme.KNOWN_CSI_DF:
        return np.minimum(g1, np.maximum(g_fso, g_rf))
    return np.maximum(_af_ratio(g1, g_fso, cfg.c_const), _af_ratio(g1_rf, g_rf, cfg.c_const))


def draw_equivalent_snr(cfg: SystemConfig, rng: np.random.Generator, size=None, *,
                        first_hop: FirstHop = FirstHop.INDEPENDENT, ideal_second_hop: bool = False):
    """Draw end-to-end SNRs.

    DF: min(g1, max(g2_fso, g2_rf)). AF: the better of the two fixed-gain
    branches g1 g2/(g2 + C). ``ideal_second_hop`` replaces both second-hop
    SNRs by infinity, which reduces either scheme to the access hop alone.
    """
    return _equivalent(cfg, _draw_hops(cfg, rng, size, FirstHop(first_hop), ideal_second_hop))


# -- importance-sampled draws ------------------------------------------------------
#
# A group of variates with joint density proportional to x^(k-1) e^(-y) in
# its standardized sum y (k exponentials of mean theta: y = sum/theta; a
# unit-mean Gamma(k): y = k x) is drawn from the nominal law, or with
# probability ½ divided by a log-uniform scale lambda in [1, big]. The
# tilted density relative to the nominal one is
#     q/p = e^y / ln(big) * int_1^big lambda^(k-1) e^(-y lambda) d lambda,
# and the trial weight is p / (½ p + ½ q) <= 2.

_SERIES_Z = 1e-8


def _lower_scaled(k, z):
    """gamma(k, z) / z^k, finite as z -> 0."""
    z = np.asarray(z, dtype=float)
    tiny = z < _SERIES_Z
    zs = np.where(tiny, 1.0, z)
    full = np.exp(gammaln(k) - k * np.log(zs)) * gammainc(k, zs)
    return np.where(tiny, 1.0 / k - z / (k + 1.0), full)


def _scale_log_ratio(k, y, big):
    """log(q/p) of the log-uniform scale mixture at standardized sum ``y``."""
    y = np.asarray(y, dtype=float)
    lower = y < k
    yl = np.where(lower, y, 1.0)
    yu = np.where(lower, k, y)
    with np.errstate(divide="ignore"):
        # small y: int_0^big - int_0^1 in the scaled lower function
        low = np.log(big ** k * _lower_scaled(k, big * yl) - _lower_scaled(k, yl))
        # large y: upper regularized functions, no cancellation
        up = gammaln(k) - k * np.log(yu) + np.log(gammaincc(k, yu) - gammaincc(k, big * yu))
    return y + np.where(lower, low, up) - math.log(math.log(big))


def _mixture_scale(rng, size, big):
    """Per-trial divisor: 1, or big^V with V uniform, with probability ½ each."""
    pick = rng.random(size) < 0.5
    return np.where(pick, big ** rng.random(size), 1.0)


def _scaled_group(k, y, big):
    # big <= 1 + 1e-3 means nothing worth tilting; draws stay nominal
    if big <= 1.001:
        return np.ones(np.shape(y))
    return 2.0 * expit(-_scale_log_ratio(k, y, big))


def _mixture_users(rng, n, size, mean):
    scale = _mixture_scale(rng, size, max(mean, 1.0))
    users = rng.standard_exponential((n, size)) * (mean / scale)
    return users.max(axis=0), _scaled_group(n, users.sum(axis=0) / mean, max(mean, 1.0))


def _mixture_hops(cfg: SystemConfig, rng, size, first_hop: FirstHop):
    """Hop draws of the defensive mixture and the per-trial likelihood ratio.

    Users are scaled down to unit mean SNR at most, the RF second hop to
    1/mean and the FSO hop (through its smaller-shape Gamma factor) to
    1/mean_fso, which spans the fades that drive g1 g2/(g2 + C) to order one.
    """
    m, n, t = cfg.mean_snr_rf, cfg.n_users, cfg.turbulence
    g1, w = _mixture_users(rng, n, size, m)
    if cfg.scheme is Scheme.UNKNOWN_CSI_AF and first_hop is FirstHop.INDEPENDENT:
        g1_rf, w_rf = _mixture_users(rng, n, size, m)
        w = w * w_rf
    else:
        g1_rf = g1
    m_fso = cfg.effective_mean_snr_fso
    small, large = sorted((t.alpha, t.beta))
    big = max(m_fso, 1.0)
    ia = rng.standard_gamma(small, size) / small / _mixture_scale(rng, size, big)
    w = w * _scaled_group(small, small * ia, big)
    ib = rng.standard_gamma(large, size) / large
    u = 1.0 - rng.random(size)
    g_fso = m_fso * (ia * ib * u ** (1.0 / t.xi2) / t.kappa) ** 2
    big = max(m, 1.0) ** 2
    g_rf = rng.standard_exponential(size) * (m / _mixture_scale(rng, size, big))
    w = w * _scaled_group(1.0, g_rf / m, big)
    return (g1, g1_rf, g_fso, g_rf), w


def _hop_sample(cfg: SystemConfig, hop: Hop, rng, size, first_hop: FirstHop):
    if hop is Hop.ACCESS_POINT:
        return _first_hop(cfg, rng, size)
    if hop is Hop.END_TO_END:
        return draw_equivalent_snr(cfg, rng, size, first_hop=first_hop)
    g1 = _first_hop(cfg, rng, size)
    g_fso, g_rf = _second_hop(cfg, rng, size)
    g2 = g_fso if hop is Hop.FSO_BRANCH else g_rf
    if cfg.scheme is Scheme.KNOWN_CSI_DF:
        return g2
    return _af_ratio(g1, g2, cfg.c_const)


# -- batch work and reduction ----------------------------------------------------

def _moments(x):
    n = x.size
    mean = float(np.mean(x))
    return n, mean, float(np.sum((x - mean) ** 2))


def _combine(a, b):
    """Chan et al. pairwise update of (n, mean, M2)."""
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, sa + sb + delta * delta * na * nb / n


def _run_batch(task):
    kind, plan, batch, extra = task
    rng = plan.rng(batch)
    cfg = plan.config
    if kind == "metrics":
        g = _equivalent(cfg, _draw_hops(cfg, rng, plan.batch_size, plan.first_hop, plan.ideal_second_hop))
        events = int(np.count_nonzero(g < cfg.gamma_th))
        if not plan.ber_mixture:
            return events, _moments(0.5 * np.exp(-g))
        hops, w = _mixture_hops(cfg, rng, plan.batch_size, plan.first_hop)
        return events, _moments(w * 0.5 * np.exp(-_equivalent(cfg, hops)))
    hop, grid = extra
    x = np.sort(_hop_sample(cfg, hop, rng, plan.batch_size, plan.first_hop))
    return np.searchsorted(x, grid, side="left").astype(np.int64)


def _map_batches(kind, plan: RunPlan, extra=None, workers: int = 1, executor=None):
    tasks = [(kind, plan, b, extra) for b in range(plan.n_batches)]
    workers = int(workers)
    if workers < 1:
        raise DomainError(f"workers must be positive, got {workers}")
    if executor is not None:
        return list(executor.map(_run_batch, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    if workers == 1 or len(tasks) == 1:
        return [_run_batch(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_batch, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def simulate(plan: RunPlan, workers: int = 1, *, executor=None) -> dict[str, EstimateCI]:
    """Outage and BER estimates from one set of draws.

    Batches run on ``executor`` when given, else on a pool of ``workers``
    processes; the result does not depend on either.
    """
    results = _map_batches("metrics", plan, workers=workers, executor=executor)
    events = sum(r[0] for r in results)
    acc = results[0][1]
    for r in results[1:]:
        acc = _combine(acc, r[1])
    n, mean, m2 = acc
    p = events / n
    outage = EstimateCI(p, math.sqrt(p * (1.0 - p) / n), n, events)
    ber = EstimateCI(mean, math.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0, n)
    return {"outage": outage, "ber": ber}


def estimate_outage(plan: RunPlan, workers: int = 1) -> EstimateCI:
    """Fraction of trials with end-to-end SNR below the threshold."""
    return simulate(plan, workers)["outage"]


def estimate_ber(plan: RunPlan, workers: int = 1) -> EstimateCI:
    """Mean conditional DPSK error ½ e^{-g} over the end-to-end SNR.

    Weighted by the likelihood ratio when ``plan.ber_mixture`` holds.
    """
    return simulate(plan, workers)["ber"]


def empirical_hop_cdf(cfg: SystemConfig, hop, grid: Sequence[float], trials: int, seed: int, *,
                      batch_size: int = DEFAULT_BATCH, first_hop: FirstHop = FirstHop.INDEPENDENT,
                      workers: int = 1) -> list[float]:
    """Empirical P(X < g) of one hop quantity at each grid point.

    For AF, the branch quantities are the fixed-gain ratios; for DF they are
    the raw second-hop SNRs.
    """
    hop = Hop(hop)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("grid must be a nonempty list of SNR points")
    if np.any(np.diff(grid) < 0):
        raise DomainError("grid must be sorted ascending")
    plan = RunPlan(cfg, trials, seed, batch_size, first_hop=first_hop)
    counts = _map_batches("hop", plan, (hop, grid), workers)
    total = np.sum(counts, axis=0)
    return [float(c) / plan.trials for c in total]
