"""KL, chi-square and Renyi divergences between smoothed mixtures, and the
chi-square / Renyi mutual informations of an atomic source across the Gaussian
noise channel.

All integrands are assembled from log-densities and exponentiated only inside
quadrature cells, in forms that are pointwise nonnegative where the quantity is
(Bregman form for KL, squared relative error for chi-square), so quadrature
noise cannot produce impossible signs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ._quad import adaptive_simpson
from .dist_core import AtomicDistribution, SmoothedMixture, LOG_SQRT_2PI, log1mexp

LOG_MASS_EPS = math.log(1e-30)


def _window(A: SmoothedMixture, B: SmoothedMixture,
            log_mass_eps: float = LOG_MASS_EPS):
    lo = min(float(A.quantile_from_log_mass(np.array([log_mass_eps]))[0]),
             float(B.quantile_from_log_mass(np.array([log_mass_eps]))[0]))
    hi = max(float(A.quantile_from_log_mass(np.array([log_mass_eps]), upper=True)[0]),
             float(B.quantile_from_log_mass(np.array([log_mass_eps]), upper=True)[0]))
    return lo, hi


def _breakpoints(A: SmoothedMixture, B: SmoothedMixture, lo: float, hi: float):
    feats = [np.array([lo, hi])]
    s = max(A.sigma, B.sigma)
    offs = np.array([-12.0, -4.0, -1.0, 0.0, 1.0, 4.0, 12.0]) * s
    for m in (A, B):
        locs = m.base.locations
        if locs.size > 17:
            locs = locs[np.linspace(0, locs.size - 1, 17).astype(int)]
        feats.append((locs[:, None] + offs[None, :]).ravel())
    return np.clip(np.concatenate(feats), lo, hi)


def _tail_masses(m: SmoothedMixture, lo: float, hi: float) -> float:
    return float(np.exp(m.log_cdf(lo)) + np.exp(m.log_sf(hi)))


def kl_divergence(A: SmoothedMixture, B: SmoothedMixture,
                  tol: float = 1e-10) -> float:
    """int rho_A log(rho_A/rho_B), nonnegative by construction.

    Integrates the Bregman form rho_B - rho_A - rho_A d (d = log rho_B/rho_A),
    whose full-line integral equals the KL divergence; the window clipping is
    compensated by the exact clipped-tail masses.
    """
    lo, hi = _window(A, B)

    def integrand(t):
        la = A.log_pdf(t)
        d = B.log_pdf(t) - la
        small = np.abs(d) < 1e-5
        g = np.where(small,
                     0.5 * d * d * (1.0 + d / 3.0 + d * d / 12.0),
                     np.expm1(np.where(small | (d > 30.0), 0.0, d))
                     - np.where(small | (d > 30.0), 0.0, d))
        out = np.exp(la) * g
        big = d > 30.0
        if np.any(big):
            out = np.where(big, np.exp(la + d) - np.exp(la) * (1.0 + d), out)
        return out

    res = adaptive_simpson(integrand, _breakpoints(A, B, lo, hi), tol)
    # int_w (rho_B - rho_A) = tail-mass(A) - tail-mass(B)
    mass_corr = _tail_masses(A, lo, hi) - _tail_masses(B, lo, hi)
    value = res.total - mass_corr
    if value < 0.0:
        value = 0.0 if value >= -10 * tol else value
    return value


def chi2_divergence(A: SmoothedMixture, B: SmoothedMixture,
                    tol: float = 1e-10) -> float:
    """int (rho_A - rho_B)^2 / rho_B over the joint deep-quantile window."""
    lo, hi = _window(A, B)

    def integrand(t):
        lb = B.log_pdf(t)
        e = A.log_pdf(t) - lb
        big = e > 300.0
        u = np.expm1(np.where(big, 0.0, e))
        out = np.exp(lb) * u * u
        if np.any(big):
            with np.errstate(over="ignore"):
                out = np.where(big, np.exp(2.0 * (e + lb) - lb), out)
        return out

    res = adaptive_simpson(integrand, _breakpoints(A, B, lo, hi), tol)
    return max(res.total, 0.0)


def renyi_divergence(A: SmoothedMixture, B: SmoothedMixture, lam: float,
                     tol: float = 1e-10) -> float:
    """(1/(lam-1)) log E_B[(rho_A/rho_B)^lam] for 1 < lam <= 2."""
    if not (1.0 < lam <= 2.0):
        raise ValueError("lambda must lie in (1, 2]")
    lo, hi = _window(A, B)

    def integrand(t):
        lb = B.log_pdf(t)
        e = A.log_pdf(t) - lb
        x = lam * e
        big = x > 300.0
        out = np.exp(lb) * np.expm1(np.where(big, 0.0, x))
        if np.any(big):
            with np.errstate(over="ignore"):
                out = np.where(big, np.exp(lb + x), out)
        return out

    res = adaptive_simpson(integrand, _breakpoints(A, B, lo, hi), tol)
    w_mass_b = 1.0 - _tail_masses(B, lo, hi)
    value = math.log(max(w_mass_b + res.total, 1e-300)) / (lam - 1.0)
    return max(value, 0.0) if value > -10 * tol else value


@dataclass(frozen=True)
class MIEstimate:
    value: float
    truncation_radius: float
    partial_by_atom: tuple
    quadrature_error: float


def _default_radius(p: AtomicDistribution, sigma: float, tol: float) -> float:
    return float(np.max(np.abs(p.locations))
                 + sigma * math.sqrt(2.0 * math.log(1.0 / tol)) + 10.0 * sigma)


def _log_abs_expm1(e: np.ndarray) -> np.ndarray:
    """log |expm1(e)|, stable for any magnitude of e."""
    out = np.empty_like(e)
    pos = e > 0
    with np.errstate(divide="ignore"):
        out[pos] = e[pos] + np.log1p(-np.exp(-e[pos]))
        out[~pos] = log1mexp(np.minimum(e[~pos], -1e-300))
    return out


def _mi_breakpoints(p: AtomicDistribution, sigma: float, R: float):
    offs = np.array([-16.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0]) * sigma
    pts = (p.locations[:, None] + offs[None, :]).ravel()
    return np.clip(np.concatenate([[-R, R], pts]), -R, R)


def _log_mix_rel(p: AtomicDistribution, sigma: float, k: int,
                 y: np.ndarray) -> np.ndarray:
    """s(y) = log(w_k phi_k(y) / rho(y)) <= 0, built from atom-relative
    exponent differences so no large-magnitude cancellation enters.

    The j-th relative exponent (logw_j + logphi_j) - (logw_k + logphi_k) is
    huge in magnitude wherever the two kernels differ a lot, but rounding there
    is harmless because the corresponding term is negligible; near crossovers
    the difference is small and exact.
    """
    rk = p.locations[k]
    lwk = p.log_weights[k]
    delta = ((p.log_weights[None, :] - lwk)
             + ((y[:, None] - rk) ** 2 - (y[:, None] - p.locations[None, :]) ** 2)
             / (2.0 * sigma * sigma))
    return -logsumexp(delta, axis=1)


def chi2_mutual_information(p: AtomicDistribution, sigma: float,
                            truncation_radius: float | None = None,
                            tol: float = 1e-9) -> MIEstimate:
    """Chi-square mutual information of S ~ p across Y = S + N(0, sigma^2).

    Decomposes as sum_k w_k chi2(phi_k || rho) with phi_k the noise kernel at
    atom k; per-atom increments are integrated separately over |y| <= R and
    reported. The integrand is assembled as phi_k e^s (1 - e^(logw_k - s))^2
    with s = log(w_k phi_k / rho), which stays float-stable even when the atom
    weights live at log-scale -1e8.
    """
    R = truncation_radius if truncation_radius is not None else \
        _default_radius(p, sigma, tol)
    bp = _mi_breakpoints(p, sigma, R)
    log_norm = -math.log(sigma) - LOG_SQRT_2PI
    parts = []
    qerr = 0.0
    per_tol = tol / p.n_atoms
    for k in range(p.n_atoms):
        rk = p.locations[k]
        lwk = p.log_weights[k]

        def integrand(y, rk=rk, lwk=lwk, k=k):
            lphi = -0.5 * ((y - rk) / sigma) ** 2 + log_norm
            s = _log_mix_rel(p, sigma, k, y)
            # w_k (phi_k - rho)^2 / rho = phi_k e^s (1 - rho/phi_k)^2 with
            # rho/phi_k = exp(logw_k - s); where that ratio overflows the
            # square is dominated by its cross-free term w_k rho
            big = (lwk - s) > 300.0
            ratio = np.exp(np.where(big, 0.0, lwk - s))
            out = np.exp(lphi + s) * (1.0 - ratio) ** 2
            return np.where(big, np.exp(lphi + 2.0 * lwk - s), out)

        res = adaptive_simpson(integrand, bp, per_tol)
        parts.append(max(res.total, 0.0))
        qerr += res.error_estimate
    return MIEstimate(value=float(np.sum(parts)), truncation_radius=R,
                      partial_by_atom=tuple(parts), quadrature_error=qerr)


def renyi_mutual_information(p: AtomicDistribution, sigma: float, lam: float,
                             truncation_radius: float | None = None,
                             tol: float = 1e-9) -> MIEstimate:
    """I_lam(S;Y) = (1/(lam-1)) log sum_k w_k int phi_k^lam rho^(1-lam) dy.

    Per-atom integrals are carried as logs (they scale like w_k^(1-lam), far
    outside float range for deep atoms); the reported per-atom parts are the
    bounded products w_k * J_k.
    """
    if not (1.0 < lam < 2.0):
        raise ValueError("lambda must lie in (1, 2)")
    R = truncation_radius if truncation_radius is not None else \
        _default_radius(p, sigma, tol)
    bp = _mi_breakpoints(p, sigma, R)
    log_norm = -math.log(sigma) - LOG_SQRT_2PI
    log_weighted = np.empty(p.n_atoms)
    qerr = 0.0
    for k in range(p.n_atoms):
        rk = p.locations[k]

        # phi_k^lam rho^(1-lam) = w_k^(1-lam) exp(g) with
        # g = log phi_k + (lam-1) s, s = log(w_k phi_k / rho) <= 0
        def log_expo(y, rk=rk, k=k):
            lphi = -0.5 * ((y - rk) / sigma) ** 2 + log_norm
            return lphi + (lam - 1.0) * _log_mix_rel(p, sigma, k, y)

        seed = np.unique(np.concatenate([bp, 0.5 * (np.sort(bp)[:-1] + np.sort(bp)[1:])]))
        shift = float(np.max(log_expo(seed)))

        def integrand(y, shift=shift, rk=rk, k=k):
            return np.exp(log_expo(y, rk, k) - shift)

        res = adaptive_simpson(integrand, bp, tol)
        # w_k J_k = w_k^(2-lam) exp(shift) * total
        log_weighted[k] = ((2.0 - lam) * p.log_weights[k] + shift
                           + math.log(max(res.total, 1e-300)))
        if shift < 700.0:
            qerr += res.error_estimate * math.exp(shift)
    log_sum = float(logsumexp(log_weighted))
    value = log_sum / (lam - 1.0)
    parts = np.exp(log_weighted)
    return MIEstimate(value=max(value, 0.0) if value > -1e-6 else value,
                      truncation_radius=R,
                      partial_by_atom=tuple(float(v) for v in parts),
                      quadrature_error=qerr)


def soft_covering_kl_bound(I_lambda: float, lam: float, n: int) -> float:
    """(1/(lam-1)) log(1 + exp((lam-1)(I_lambda - log n))), via softplus."""
    if not (1.0 < lam <= 2.0):
        raise ValueError("lambda must lie in (1, 2]")
    if n < 2:
        raise ValueError("n must be >= 2")
    x = (lam - 1.0) * (I_lambda - math.log(n))
    return float(np.logaddexp(0.0, x)) / (lam - 1.0)
