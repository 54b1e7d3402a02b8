import math

import numpy as np
import pytest
from scipy.integrate import quad

from sotlab import constructions as cons
from sotlab import divergences as dv
from sotlab.dist_core import AtomicDistribution, SmoothedMixture

from conftest import random_mixture


def gaussians(d):
    a = SmoothedMixture(AtomicDistribution.from_weights(
        np.array([0.0]), np.array([1.0])), 1.0)
    b = SmoothedMixture(AtomicDistribution.from_weights(
        np.array([d]), np.array([1.0])), 1.0)
    return a, b


def kl_mi_oracle(p, sigma):
    locs, ws = p.locations, p.weights()

    def f(y):
        phis = np.exp(-0.5 * ((y - locs) / sigma) ** 2) / (
            sigma * math.sqrt(2 * math.pi))
        rho = ws @ phis
        return sum(w * ph * math.log(ph / rho)
                   for w, ph in zip(ws, phis) if w > 0 and ph > 0)

    lo = locs.min() - 10 * sigma
    hi = locs.max() + 10 * sigma
    return quad(f, lo, hi, limit=200)[0]


def test_gaussian_closed_forms():
    a, b = gaussians(2.0)
    assert math.isclose(dv.kl_divergence(a, b), 2.0, rel_tol=1e-9)
    assert math.isclose(dv.chi2_divergence(a, b), math.exp(4.0) - 1.0,
                        rel_tol=1e-8)
    assert math.isclose(dv.renyi_divergence(a, b, 2.0), 4.0, rel_tol=1e-9)
    assert math.isclose(dv.renyi_divergence(a, b, 1.5), 3.0, rel_tol=1e-9)


def test_nonnegative_and_zero_iff_equal(rng):
    m = random_mixture(rng)
    assert abs(dv.kl_divergence(m, m)) <= 1e-12
    assert abs(dv.chi2_divergence(m, m)) <= 1e-12
    pert = SmoothedMixture(m.base.shift(0.01), m.sigma)
    assert dv.kl_divergence(m, pert) > 0
    assert dv.chi2_divergence(m, pert) > 0
    assert dv.renyi_divergence(m, pert, 1.7) > 0


def test_renyi_monotone_and_kl_limit(rng):
    a = random_mixture(rng)
    b = random_mixture(rng)
    vals = [dv.renyi_divergence(a, b, lam) for lam in (1.001, 1.3, 1.6, 2.0)]
    assert all(y >= x - 1e-10 for x, y in zip(vals, vals[1:]))
    assert abs(vals[0] - dv.kl_divergence(a, b)) <= 1e-2 * (1 + vals[0])


def test_renyi_two_equals_log1p_chi2(rng):
    a = random_mixture(rng)
    b = random_mixture(rng)
    d2 = dv.renyi_divergence(a, b, 2.0)
    chi2 = dv.chi2_divergence(a, b)
    assert math.isclose(d2, math.log1p(chi2), rel_tol=1e-8)


def test_mi_single_atom_zero():
    p = AtomicDistribution.from_weights(np.array([3.0]), np.array([1.0]))
    assert dv.chi2_mutual_information(p, 1.0).value <= 1e-12
    assert dv.renyi_mutual_information(p, 1.0, 1.5).value <= 1e-9


def test_mi_monotone_in_radius():
    p = AtomicDistribution.from_weights(np.array([0.0, 1.0]),
                                        np.array([0.5, 0.5]))
    vals = [dv.chi2_mutual_information(p, 1.0, truncation_radius=r).value
            for r in (3.0, 6.0, 12.0)]
    assert all(y >= x - 1e-12 for x, y in zip(vals, vals[1:]))


def test_renyi_mi_matches_kl_oracle_near_one():
    p = AtomicDistribution.from_weights(np.array([0.0, 0.5]),
                                        np.array([0.5, 0.5]))
    oracle = kl_mi_oracle(p, 1.0)
    got = dv.renyi_mutual_information(p, 1.0, 1.001).value
    assert abs(got - oracle) <= 1e-2 * (1 + oracle)


def test_hard_example_increments_do_not_decay():
    c = cons.chi2_admissible_c(2.0)
    hard = cons.chi2_hard_example(2.0, c, 6)
    parts = dv.chi2_mutual_information(hard, 1.0).partial_by_atom
    assert all(parts[k] >= 0.5 * parts[2] for k in range(3, 7))
    # deep-atom increments approach 1 (each atom resolvable from the noise)
    assert all(abs(parts[k] - 1.0) <= 1e-6 for k in range(3, 7))


def test_renyi_mi_deep_atoms_finite():
    c = cons.chi2_admissible_c(2.0)
    hard = cons.chi2_hard_example(2.0, c, 8)
    est = dv.renyi_mutual_information(hard, 1.0, 1.5)
    assert np.isfinite(est.value) and est.value >= 0


def test_lambda_guards(rng):
    a = random_mixture(rng)
    b = random_mixture(rng)
    p = a.base
    with pytest.raises(ValueError):
        dv.renyi_divergence(a, b, 1.0)
    with pytest.raises(ValueError):
        dv.renyi_divergence(a, b, 2.5)
    with pytest.raises(ValueError):
        dv.renyi_mutual_information(p, 1.0, 2.0)
    with pytest.raises(ValueError):
        dv.soft_covering_kl_bound(1.0, 1.0, 100)
    with pytest.raises(ValueError):
        dv.soft_covering_kl_bound(1.0, 2.0, 1)


def test_soft_covering_monotone_in_n():
    vals = [dv.soft_covering_kl_bound(3.0, 1.9, n) for n in (4, 64, 1024)]
    assert all(y < x for x, y in zip(vals, vals[1:]))
    # softplus form stays positive and finite
    assert all(0 < v < 10 for v in vals)
