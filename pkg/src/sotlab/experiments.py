"""Monte Carlo rate experiments for smoothed empirical measures.

Estimates E[W2^2] and E[KL] between the smoothed empirical measure and the
smoothed truth over n-sweeps, fits log-log rates, and runs the two scan
protocols: the adaptive two-point scan whose displacement h grows with n (the
lower-bound construction for K > sigma) and the phase scan across the K = sigma
boundary.

Trials are independent tasks with seeds spawned from one splittable root; the
reduction is ordered by trial index, so a (config, seed) pair always produces
the same floats regardless of worker count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import constructions, divergences, transport
from .dist_core import AtomicDistribution, SmoothedMixture


@dataclass(frozen=True)
class RateSeries:
    """Per-n Monte Carlo estimates: (n, estimate, stderr, trials) rows."""
    points: tuple

    def __post_init__(self):
        ns = [q[0] for q in self.points]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n must be strictly increasing")
        if any(q[1] < 0.0 or q[2] < 0.0 for q in self.points):
            raise ValueError("estimates and stderrs must be nonnegative")


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    slope_stderr: float
    r_squared: float

    def __post_init__(self):
        if not (-1e-9 <= self.r_squared <= 1.0 + 1e-9):
            raise ValueError("r_squared must lie in [0, 1]")


@dataclass(frozen=True)
class MCResult:
    estimate: float
    stderr: float
    trials: int
    values: tuple = ()

    def __iter__(self):
        return iter((self.estimate, self.stderr))


def default_workers() -> int:
    return max(1, int(os.environ.get("SOT_THREADS", "1")))


def _root_seed(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def _run_trials(per_trial, trials: int, seed, workers: int | None,
                min_trials: int = 50, rel_stop: float = 0.02,
                chunk: int = 25) -> np.ndarray:
    """Run up to `trials` seeded tasks, stopping at a chunk boundary once the
    relative standard error drops below `rel_stop`. Deterministic per seed."""
    if trials < 2:
        raise ValueError("trials must be >= 2")
    children = _root_seed(seed).spawn(trials)
    workers = workers or default_workers()
    values: list[float] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        idx = 0
        while idx < trials:
            batch = list(enumerate(children[idx:idx + chunk], start=idx))
            values.extend(pool.map(_guarded(per_trial), batch))
            idx += len(batch)
            if idx >= min_trials:
                arr = np.asarray(values)
                est = float(arr.mean())
                se = float(arr.std(ddof=1)) / math.sqrt(arr.size)
                if est > 0.0 and se / est < rel_stop:
                    break
    return np.asarray(values)


def _guarded(per_trial):
    def run(task):
        i, child = task
        try:
            return per_trial(np.random.default_rng(child))
        except Exception as exc:
            raise RuntimeError(f"trial {i} failed: {exc}") from exc
    return run


def _summarize(values: np.ndarray) -> MCResult:
    est = float(values.mean())
    se = float(values.std(ddof=1)) / math.sqrt(values.size)
    return MCResult(estimate=est, stderr=se, trials=int(values.size),
                    values=tuple(float(v) for v in values))


def mc_w2sq_values(p: AtomicDistribution, sigma: float, n: int, trials: int,
                   seed, tol: float = 1e-8,
                   workers: int | None = None) -> np.ndarray:
    """Per-trial W2^2(P_n * N(0, sigma^2), P * N(0, sigma^2)) values."""
    truth = SmoothedMixture(p, sigma)

    def one(rng):
        emp = p.sample(n, rng).to_atomic()
        return transport.w2_squared(SmoothedMixture(emp, sigma), truth,
                                    tol=tol).total

    return _run_trials(one, trials, seed, workers)


def mc_expected_w2sq(p: AtomicDistribution, sigma: float, n: int, trials: int,
                     seed, tol: float = 1e-8,
                     workers: int | None = None) -> MCResult:
    return _summarize(mc_w2sq_values(p, sigma, n, trials, seed, tol, workers))


def mc_expected_kl(p: AtomicDistribution, sigma: float, n: int, trials: int,
                   seed, tol: float = 1e-10,
                   workers: int | None = None) -> MCResult:
    """Mean and stderr of KL(P_n * N || P * N) over seeded trials."""
    truth = SmoothedMixture(p, sigma)

    def one(rng):
        emp = p.sample(n, rng).to_atomic()
        return divergences.kl_divergence(SmoothedMixture(emp, sigma), truth,
                                         tol=tol)

    return _summarize(_run_trials(one, trials, seed, workers))


def fit_rate(series: RateSeries) -> RateFit:
    """Weighted least squares of log(estimate) on log(n).

    Weights are 1/(stderr/estimate)^2, the inverse variance of log(estimate)
    to first order; exact points (stderr 0) get a large capped weight.
    """
    pts = series.points
    if len(pts) < 3:
        raise ValueError("need at least 3 points to fit a rate")
    bad = [i for i, q in enumerate(pts) if q[1] <= 0.0]
    if bad:
        raise ValueError(f"nonpositive estimates at indices {bad}")
    x = np.log([q[0] for q in pts])
    y = np.log([q[1] for q in pts])
    rel = np.array([max(q[2] / q[1], 1e-12) for q in pts])
    w = 1.0 / rel ** 2
    sw = w.sum()
    xbar = (w * x).sum() / sw
    ybar = (w * y).sum() / sw
    sxx = (w * (x - xbar) ** 2).sum()
    slope = (w * (x - xbar) * (y - ybar)).sum() / sxx
    intercept = ybar - slope * xbar
    resid = y - intercept - slope * x
    dof = len(pts) - 2
    sigma2 = (w * resid ** 2).sum() / dof if dof > 0 else 0.0
    slope_se = math.sqrt(sigma2 / sxx)
    sst = (w * (y - ybar) ** 2).sum()
    r2 = 1.0 - (w * resid ** 2).sum() / sst if sst > 0 else 1.0
    return RateFit(slope=float(slope), intercept=float(intercept),
                   slope_stderr=float(slope_se),
                   r_squared=float(min(max(r2, 0.0), 1.0)))


# ---------------------------------------------------------------------------
# adaptive two-point scan (h grows with n)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRecord:
    n: int
    h: float
    t: float
    p_h: float
    feasible: bool          # n * p_h >= 128, the event-frequency condition


@dataclass(frozen=True)
class BernoulliScanPlan:
    K: float
    sigma: float
    epsilon: float
    delta: float
    zeta: float
    records: tuple
    w2sq_series: RateSeries | None = None

    def __post_init__(self):
        if not (0.0 < self.delta < 0.5):
            raise ValueError("delta must lie in (0, 1/2)")
        if self.K > self.sigma and not self.zeta > 1.0 / (2.0 * self.K ** 2):
            raise ValueError("zeta must exceed 1/(2K^2) when K > sigma")


def solve_delta(K: float, sigma: float, epsilon: float,
                tol: float = 1e-10) -> float:
    """Smallest delta with

        (1+d)(1+k)^2 / (2(1-d)(1+k) - 4dk) = (1+k)^2/(2+2k) + 2 eps,

    k = sigma^2/K^2, found by bisection; the left side increases from the
    eps=0 value at d=0 and blows up at the denominator root."""
    kap = (sigma / K) ** 2
    target = (1.0 + kap) ** 2 / (2.0 + 2.0 * kap) + 2.0 * epsilon

    def g(d):
        den = 2.0 * (1.0 - d) * (1.0 + kap) - 4.0 * d * kap
        return (1.0 + d) * (1.0 + kap) ** 2 / den - target

    hi = (1.0 + kap) / (1.0 + 3.0 * kap) * (1.0 - 1e-12)   # denominator root
    lo = 0.0
    if g(hi) < 0.0:
        raise ValueError("no admissible delta below the denominator root")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def zeta_constant(K: float, sigma: float) -> float:
    return (0.5 + sigma * sigma / (2.0 * K * K)) ** 2 / (2.0 * sigma * sigma)


def scan_h(n: int, K: float, sigma: float, delta: float) -> float:
    z = zeta_constant(K, sigma)
    rate = (1.0 - delta) * z - 1.0 / (4.0 * K * K)
    if rate <= 0.0:
        raise ValueError("delta too large: h(n) exponent rate is nonpositive")
    return math.sqrt(math.log(12.0 * math.sqrt(n) / (math.sqrt(math.pi) * sigma))
                     / rate)


def bernoulli_scan(K: float, sigma: float, epsilon: float, n_list, trials: int,
                   seed, tol: float = 1e-8, workers: int | None = None):
    """Adaptive two-point scan: at each n the displacement h(n) is tuned so
    the smoothed-W2 error decays at the slow rate n^(-alpha-eps).

    Returns (plan, E[W2] series); per-trial W2 values are square roots of the
    exact quadratic transport costs, and the E[W2^2] series rides along on the
    plan. Points with n p_h < 128 (the regime where the one-sided CDF event is
    not guaranteed) are flagged but still estimated.
    """
    if not K > sigma:
        raise ValueError("the adaptive scan requires K > sigma")
    delta = solve_delta(K, sigma, epsilon)
    z = zeta_constant(K, sigma)
    if delta >= min(0.5, 1.0 - 1.0 / (2.0 * K * K * z)):
        raise ValueError("epsilon too large: delta violates its admissible range")
    n_list = sorted(int(n) for n in n_list)
    children = _root_seed(seed).spawn(len(n_list))
    records = []
    w_points = []
    wsq_points = []
    for n, child in zip(n_list, children):
        h = scan_h(n, K, sigma, delta)
        t = 0.5 * h + sigma * sigma * h / (2.0 * K * K)
        p_h = math.exp(-h * h / (2.0 * K * K))
        records.append(ScanRecord(n=n, h=h, t=t, p_h=p_h,
                                  feasible=bool(n * p_h >= 128.0)))
        p = constructions.bernoulli_two_point(h, K)
        vals = mc_w2sq_values(p, sigma, n, trials, child, tol, workers)
        w = _summarize(np.sqrt(vals))
        wsq = _summarize(vals)
        w_points.append((n, w.estimate, w.stderr, w.trials))
        wsq_points.append((n, wsq.estimate, wsq.stderr, wsq.trials))
    plan = BernoulliScanPlan(K=K, sigma=sigma, epsilon=epsilon, delta=delta,
                             zeta=z, records=tuple(records),
                             w2sq_series=RateSeries(points=tuple(wsq_points)))
    return plan, RateSeries(points=tuple(w_points))


def phase_scan(K_list, sigma: float, family: str, n_list, trials: int, seed,
               epsilon: float = 0.02, h: float = 2.0, tol: float = 1e-8,
               workers: int | None = None):
    """Fitted E[W2^2] log-log slope for each K across the K = sigma boundary.

    family 'two_point' holds the displacement fixed at `h`; family 'bernoulli'
    runs the adaptive scan (K > sigma only). Returns a list of dicts with
    K, slope, slope_stderr, r_squared.
    """
    if family not in ("two_point", "bernoulli"):
        raise ValueError("family must be 'two_point' or 'bernoulli'")
    K_list = list(K_list)
    children = _root_seed(seed).spawn(max(len(K_list), 1))
    table = []
    for K, child in zip(K_list, children):
        if family == "two_point":
            p = constructions.bernoulli_two_point(h, K)
            grand = child.spawn(len(list(n_list)))
            pts = []
            for n, c in zip(sorted(int(v) for v in n_list), grand):
                r = mc_expected_w2sq(p, sigma, n, trials, c, tol, workers)
                pts.append((n, r.estimate, r.stderr, r.trials))
            fit = fit_rate(RateSeries(points=tuple(pts)))
        else:
            plan, _ = bernoulli_scan(K, sigma, epsilon, n_list, trials, child,
                                     tol, workers)
            fit = fit_rate(plan.w2sq_series)
        table.append({"K": float(K), "slope": fit.slope,
                      "slope_stderr": fit.slope_stderr,
                      "r_squared": fit.r_squared})
    return table
