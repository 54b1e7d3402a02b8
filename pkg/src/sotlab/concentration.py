"""Empirical-CDF concentration statistics and smoothed-CDF gap event
frequencies.

Three families of checks live here:

* the weighted sup statistic sup_t |F(t) - F_n(t)| / sqrt(1/n v F(1-F)) and
  its 16/sqrt(n) log(2n/delta) bound, run over many replications;
* the Bernoulli-mixture gap event at the displaced probe point t = h/2 +
  sigma^2 h/(2 K^2), whose indicator reduces exactly to a binomial deviation;
* the multi-scale schedule gap event at the probes t_k r_k, simulated through
  multinomial atom counts.

All frequency checks are one-sided: the theory gives probability *lower*
bounds, so a run passes when the empirical frequency sits above the stated
level minus a 3-sigma binomial band.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .dist_core import (AtomicDistribution, EmpiricalMeasure, SmoothedMixture,
                        _as_generator)


@dataclass(frozen=True)
class ConcentrationReport:
    n: int
    delta: float
    statistic: float          # last replication's statistic for single runs
    bound: float
    violated: bool
    violation_rate: float | None = None
    statistics: tuple = ()

    def __post_init__(self):
        if self.statistic < 0.0:
            raise ValueError("statistic must be nonnegative")
        if self.violation_rate is not None and not (0.0 <= self.violation_rate <= 1.0):
            raise ValueError("violation_rate must lie in [0, 1]")


@dataclass(frozen=True)
class FrequencyReport:
    applicable: bool
    replications: int
    frequency: float | None
    level: float              # the guaranteed lower bound on the probability
    band: float | None        # 3-sigma binomial half-width
    passed: bool | None
    diagnostic: str = ""


def weighted_concentration_bound(n: int, delta: float) -> float:
    return 16.0 / math.sqrt(n) * math.log(2.0 * n / delta)


def _statistic_grid(F: SmoothedMixture, samples: np.ndarray, n: int) -> np.ndarray:
    pts = np.sort(samples)
    mids = 0.5 * (pts[:-1] + pts[1:]) if pts.size > 1 else np.empty(0)
    anchors = F.quantile(np.arange(1, 2 * n) / (2.0 * n))
    lo = min(pts[0], anchors[0]) - 1.0
    hi = max(pts[-1], anchors[-1]) + 1.0
    return np.unique(np.concatenate([pts, mids, anchors, [lo, hi]]))


def weighted_cdf_statistic(F: SmoothedMixture, sample, n: int | None = None) -> float:
    """sup_t |F(t) - F_n(t)| / sqrt(1/n v (F(t) ^ (1 - F(t)))).

    `sample` is either an EmpiricalMeasure (step-function F_n; both one-sided
    limits enter the sup at each jump) or a SmoothedMixture whose CDF is
    evaluated exactly (the smoothed-empirical variant; pass n explicitly).
    The sup is taken over sample points, their midpoints, and the quantile
    anchors {F^{-1}(k/2n)}.
    """
    if isinstance(sample, EmpiricalMeasure):
        if n is None:
            n = sample.n
        pts_src = sample.samples
    elif isinstance(sample, SmoothedMixture):
        if n is None:
            raise ValueError("n is required for a smoothed-mixture sample")
        pts_src = sample.base.locations
    else:
        raise TypeError("sample must be an EmpiricalMeasure or SmoothedMixture")
    grid = _statistic_grid(F, np.asarray(pts_src, dtype=float), n)
    Ft = F.cdf(grid)
    if isinstance(sample, EmpiricalMeasure):
        right = np.searchsorted(sample.samples, grid, side="right") / n
        left = np.searchsorted(sample.samples, grid, side="left") / n
        dev = np.maximum(np.abs(Ft - right), np.abs(Ft - left))
    else:
        dev = np.abs(Ft - sample.cdf(grid))
    denom = np.sqrt(np.maximum(1.0 / n, np.minimum(Ft, 1.0 - Ft)))
    return float(np.max(dev / denom))


def weighted_cdf_concentration(F: SmoothedMixture, n: int, delta: float,
                               replications: int, seed) -> ConcentrationReport:
    """Draw `replications` i.i.d. n-samples from F and report how often the
    weighted statistic exceeds 16/sqrt(n) log(2n/delta)."""
    if replications < 1:
        raise ValueError("replications must be >= 1")
    bound = weighted_concentration_bound(n, delta)
    children = np.random.SeedSequence(_seed_entropy(seed)).spawn(replications)
    stats = [weighted_cdf_statistic(F, F.sample(n, np.random.default_rng(c)))
             for c in children]
    stats = np.asarray(stats)
    violations = stats > bound
    return ConcentrationReport(n=n, delta=delta, statistic=float(stats[-1]),
                               bound=bound, violated=bool(violations[-1]),
                               violation_rate=float(np.mean(violations)),
                               statistics=tuple(float(s) for s in stats))


def _seed_entropy(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed.entropy
    return int(seed)


def _frequency_pass(hits: int, replications: int, level: float):
    freq = hits / replications
    band = 3.0 * math.sqrt(max(freq * (1.0 - freq), 0.0) / replications)
    return freq, band, freq >= level - band


def berry_esseen_event_frequency(h: float, K: float, sigma: float, n: int,
                                 replications: int, seed) -> FrequencyReport:
    """Frequency of the smoothed-CDF gap event for the two-point mixture.

    With P_h = (1-p_h) d_0 + p_h d_h, p_h = exp(-h^2/2K^2), the gap at the
    probe t = h/2 + sigma^2 h / (2 K^2) satisfies exactly

        F~_{n,sigma}(t) - F_sigma(t) = (p^_h - p_h) (Phi_s(t-h) - Phi_s(t)),

    so the event {gap >= exp(-h^2/4K^2)/sqrt(18 n)} is a one-sided binomial
    deviation; only the count of h-atoms is simulated. The event holds with
    probability >= 1/16 whenever n p_h >= 128.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    log_p = -h * h / (2.0 * K * K)
    p_h = math.exp(log_p)
    if p_h >= 0.5:
        raise ValueError("requires p_h < 1/2 (h too small for this K)")
    if n * p_h < 128.0:
        return FrequencyReport(applicable=False, replications=replications,
                               frequency=None, level=1.0 / 16.0, band=None,
                               passed=None,
                               diagnostic=f"n*p_h = {n * p_h:.1f} < 128")
    t = 0.5 * h + sigma * sigma * h / (2.0 * K * K)
    factor = float(ndtr((t - h) / sigma) - ndtr(t / sigma))   # < 0
    thr = math.exp(-h * h / (4.0 * K * K)) / math.sqrt(18.0 * n)
    # gap >= thr  <=>  p^ - p <= thr / factor (factor negative)
    cut = thr / factor
    children = np.random.SeedSequence(_seed_entropy(seed)).spawn(replications)
    hits = 0
    for c in children:
        count = np.random.default_rng(c).binomial(n, p_h)
        if count / n - p_h <= cut:
            hits += 1
    freq, band, ok = _frequency_pass(hits, replications, 1.0 / 16.0)
    return FrequencyReport(applicable=True, replications=replications,
                           frequency=freq, level=1.0 / 16.0, band=band,
                           passed=ok)


def schedule_gap_dominance(schedule, p: AtomicDistribution, sigma: float,
                           k: int, replications: int, seed,
                           n: int | None = None) -> FrequencyReport:
    """Frequency of the multi-scale gap event at the probe t_k r_k.

    The smoothed empirical CDF is a weighted sum of Gaussian CDFs at the atom
    locations, so each replication only needs the multinomial atom counts.
    The event {F~_{n,sigma}(t_k r_k) - F_sigma(t_k r_k) >= (1/2) sqrt(p_{k+1}/n)}
    holds with probability >= 1/64 whenever n p_{k+1} >= 32768. `n` defaults to
    the schedule's n_k, which grows super-geometrically; pass a desk-scale n
    explicitly for k past the first feasible level.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    i = k - 1                           # schedule arrays are 0-based, levels 1-based
    if not (0 <= i < schedule.k_max - 1):
        raise ValueError("need 1 <= k < k_max (the event references p_{k+1})")
    if n is None:
        n = schedule.n_k[i]
        if n is None:
            return FrequencyReport(
                applicable=False, replications=replications, frequency=None,
                level=1.0 / 64.0, band=None, passed=None,
                diagnostic=f"schedule n_{k} is infeasible (overflow)")
    p_next = math.exp(schedule.log_p_k[i + 1])
    if n * p_next < 32768.0:
        return FrequencyReport(
            applicable=False, replications=replications, frequency=None,
            level=1.0 / 64.0, band=None, passed=None,
            diagnostic=f"n*p_(k+1) = {n * p_next:.1f} < 32768")
    t = schedule.t_k[i] * schedule.r_k[i]
    m = SmoothedMixture(p, sigma)
    F_t = float(m.cdf(np.array([t]))[0])
    kernel = ndtr((t - p.locations) / sigma)
    weights = p.weights()
    weights = weights / weights.sum()   # guard residual rounding for multinomial
    gap_cut = 0.5 * math.sqrt(p_next / n)
    children = np.random.SeedSequence(_seed_entropy(seed)).spawn(replications)
    hits = 0
    for c in children:
        counts = np.random.default_rng(c).multinomial(n, weights)
        if float(counts @ kernel) / n - F_t >= gap_cut:
            hits += 1
    freq, band, ok = _frequency_pass(hits, replications, 1.0 / 64.0)
    return FrequencyReport(applicable=True, replications=replications,
                           frequency=freq, level=1.0 / 64.0, band=band,
                           passed=ok)
