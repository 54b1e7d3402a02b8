"""Tail-mass vs smoothed-density exponent machinery and interval-probability probes.

The exponent beta links the tail of a K-subgaussian distribution to the tail of
its Gaussian smoothing (1 - F(r) <~ rho(r)^beta at sigma = 1); alpha is the
resulting W2 convergence exponent. Existential constants are replaced by
empirical envelopes measured over declared grids, always reported with the grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist_core import AtomicDistribution, SmoothedMixture, SubgaussianProfile


def beta_exponent(K: float) -> float:
    """4K^2/(1+K^2)^2, the tail-to-density exponent at sigma = 1."""
    if K <= 0:
        raise ValueError("K must be positive")
    return 4.0 * K * K / (1.0 + K * K) ** 2


def alpha_exponent(K: float, sigma: float) -> float:
    """(sigma^2+K^2)^2 / (4 (sigma^4+K^4)), the sharp W2 rate exponent."""
    if K <= 0 or sigma <= 0:
        raise ValueError("K and sigma must be positive")
    a = (sigma * sigma + K * K) ** 2 / (4.0 * (sigma ** 4 + K ** 4))
    # internal consistency with the beta exponent of the rescaled problem
    b = beta_exponent(K / sigma)
    if abs(2.0 * a - 1.0 / (2.0 - b)) > 1e-12:
        raise AssertionError("exponent identity 2*alpha = 1/(2-beta) violated")
    return a


@dataclass(frozen=True)
class TailDensityReport:
    """Empirical envelope for tail mass vs density^exponent on a grid."""

    M_hat: float
    log_M_hat: float
    r_grid: np.ndarray
    log_tail: np.ndarray
    log_density: np.ndarray
    ratio: np.ndarray  # log-tail / log-density tightness diagnostic
    beta: float
    epsilon: float


def tail_density_inequality_probe(p: AtomicDistribution, profile: SubgaussianProfile,
                                  epsilon: float, r_grid,
                                  sigma: float = 1.0) -> TailDensityReport:
    """Measure M_hat = sup_r (1-F(r)) / rho(r)^(beta-eps) for the smoothing of p.

    Negative grid points use the mirrored form F(r) / rho(r)^(beta-eps). The
    tightness diagnostic log(1-F)/log(rho) should approach beta where the
    envelope is attained.
    """
    if sigma != 1.0:
        raise ValueError("probe is defined at the sigma = 1 normalization")
    beta = beta_exponent(profile.K)
    if not (0.0 < epsilon < beta):
        raise ValueError("need 0 < epsilon < beta")
    r = np.asarray(r_grid, dtype=float)
    m = SmoothedMixture(p, sigma)
    log_tail = np.where(r >= 0.0, m.log_sf(r), m.log_cdf(r))
    log_rho = m.log_pdf(r)
    log_ratio_env = log_tail - (beta - epsilon) * log_rho
    i = int(np.argmax(log_ratio_env))
    with np.errstate(divide="ignore", invalid="ignore"):
        tightness = log_tail / log_rho
    return TailDensityReport(
        M_hat=float(np.exp(log_ratio_env[i])),
        log_M_hat=float(log_ratio_env[i]),
        r_grid=r,
        log_tail=log_tail,
        log_density=log_rho,
        ratio=tightness,
        beta=beta,
        epsilon=epsilon,
    )


@dataclass(frozen=True)
class DensityLowerReport:
    """Empirical floor for rho(r) / P[X >= r]^(1/(beta-eps))."""

    C_hat: float
    log_C_hat: float
    r_grid: np.ndarray
    log_ratio: np.ndarray
    last_decade_min: float
    passed: bool
    beta: float
    epsilon: float


def density_tail_lower_probe(p: AtomicDistribution, profile: SubgaussianProfile,
                             epsilon: float, r_grid,
                             sigma: float = 1.0) -> DensityLowerReport:
    """Measure C_hat = inf_r rho(r) / P[X >= r]^(1/(beta-eps)).

    P[X >= r] is the tail of the *unsmoothed* atomic distribution; grid points
    beyond the last atom give an empty tail and count as +inf ratios.
    """
    if sigma != 1.0:
        raise ValueError("probe is defined at the sigma = 1 normalization")
    beta = beta_exponent(profile.K)
    if not (0.0 < epsilon < beta):
        raise ValueError("need 0 < epsilon < beta")
    r = np.asarray(r_grid, dtype=float)
    m = SmoothedMixture(p, sigma)
    log_rho = m.log_pdf(r)
    log_tail = np.array([p.log_sf_discrete(ri) for ri in r])
    with np.errstate(invalid="ignore"):
        log_ratio = np.where(np.isfinite(log_tail),
                             log_rho - log_tail / (beta - epsilon),
                             np.inf)
    finite = log_ratio[np.isfinite(log_ratio)]
    log_c = float(np.min(finite)) if finite.size else math.inf
    # monitor collapse: minimum over the top decade of the grid
    top = r >= (np.max(r) / 10.0 if np.max(r) > 0 else np.max(r))
    tail_min = log_ratio[top]
    tail_min = tail_min[np.isfinite(tail_min)]
    if tail_min.size:
        last_decade = _safe_exp(float(np.min(tail_min)))
    else:
        last_decade = math.inf
    return DensityLowerReport(
        C_hat=float(np.exp(log_c)) if np.isfinite(log_c) else math.inf,
        log_C_hat=log_c,
        r_grid=r,
        log_ratio=log_ratio,
        last_decade_min=last_decade,
        passed=bool(log_c > -np.inf),
        beta=beta,
        epsilon=epsilon,
    )


@dataclass(frozen=True)
class IntervalProbBounds:
    """Exact interval probabilities near a schedule probe vs their exponent envelopes."""

    k: int
    probe: float
    log_lower_prob: float   # log P(X in [probe+1, probe+2])
    log_upper_prob: float   # log P(X in [probe, probe+2])
    log_lower_envelope: float
    log_upper_envelope: float
    C_l_hat: float          # may overflow to +inf; see log fields
    C_u_hat: float
    log_C_l_hat: float
    log_C_u_hat: float
    C_l_floor: float        # the explicit 1/(2 pi sigma K)
    lower_ok: bool


def interval_prob_bounds(schedule, p: AtomicDistribution, sigma: float,
                         k: int) -> IntervalProbBounds:
    """Exact probe-interval probabilities for the super-geometric schedule.

    Returns the implied constants relative to the exponent envelopes
    exp(-(t_k^2 - kappa c_k - c_k) (r_k +/- 2)^2 / (2 sigma^2)). Everything is
    carried in log-space; linear fields saturate when the log is out of range.
    """
    i = k - 1
    if not (0 <= i < schedule.c_k.size):
        raise ValueError("k out of schedule range")
    c = float(schedule.c_k[i])
    kappa = schedule.kappa
    need = max(math.sqrt(2.0 / kappa), (kappa + 3.0) / (1.0 - kappa))
    if c < need:
        raise ValueError("schedule ratio c_k violates the upper-bound precondition")
    r = float(schedule.r_k[i])
    t = float(schedule.t_k[i])
    probe = t * r
    m = SmoothedMixture(p, sigma)
    log_lo = float(m.log_interval_prob(probe + 1.0, probe + 2.0))
    log_up = float(m.log_interval_prob(probe, probe + 2.0))
    expo = t * t - kappa * c - c
    log_env_lo = -expo * (r + 2.0) ** 2 / (2.0 * sigma * sigma)
    log_env_up = -expo * (r - 2.0) ** 2 / (2.0 * sigma * sigma)
    log_cl = log_lo - log_env_lo
    log_cu = log_up - log_env_up
    floor = 1.0 / (2.0 * math.pi * sigma * K_of(schedule, sigma))
    return IntervalProbBounds(
        k=k, probe=probe,
        log_lower_prob=log_lo, log_upper_prob=log_up,
        log_lower_envelope=log_env_lo, log_upper_envelope=log_env_up,
        C_l_hat=_safe_exp(log_cl), C_u_hat=_safe_exp(log_cu),
        log_C_l_hat=log_cl, log_C_u_hat=log_cu,
        C_l_floor=floor,
        lower_ok=bool(log_cl >= math.log(floor)),
    )


def K_of(schedule, sigma: float) -> float:
    """Recover K from a schedule's kappa = sigma^2/K^2."""
    return sigma / math.sqrt(schedule.kappa)


def _safe_exp(x: float) -> float:
    if x > 700.0:
        return math.inf
    if x < -745.0:
        return 0.0
    return math.exp(x)
