import math

import numpy as np
import pytest

from sotlab import constructions as cons
from sotlab import tail_bounds as tb
from sotlab.dist_core import (AtomicDistribution, SmoothedMixture,
                              SubgaussianProfile)


def test_beta_examples():
    assert math.isclose(tb.beta_exponent(1.0), 1.0, rel_tol=1e-14)
    assert math.isclose(tb.beta_exponent(3.0), 0.36, rel_tol=1e-14)
    assert tb.beta_exponent(1e6) < 1e-5


def test_alpha_examples():
    assert math.isclose(tb.alpha_exponent(1.0, 1.0), 0.5, rel_tol=1e-14)
    assert math.isclose(tb.alpha_exponent(2.0, 1.0), 25.0 / 68.0, rel_tol=1e-14)
    assert abs(tb.alpha_exponent(1e5, 1.0) - 0.25) < 1e-9


def test_alpha_beta_identity():
    for K in np.geomspace(0.02, 50.0, 60):
        a = tb.alpha_exponent(float(K), 1.0)
        b = tb.beta_exponent(float(K))
        assert abs(2 * a - 1.0 / (2.0 - b)) <= 1e-12


def test_tail_density_point_mass():
    p = AtomicDistribution.from_weights(np.array([0.0]), np.array([1.0]))
    prof = SubgaussianProfile(K=1.0)
    rep = tb.tail_density_inequality_probe(p, prof, 0.1,
                                           np.linspace(0.0, 8.0, 81))
    assert np.isfinite(rep.M_hat) and rep.M_hat > 0


def test_tail_density_grid_stability():
    p = cons.bernoulli_two_point(5.0, 2.0)
    prof = SubgaussianProfile(K=2.0)
    r1 = tb.tail_density_inequality_probe(p, prof, 0.1,
                                          np.linspace(0.0, 12.0, 101))
    r2 = tb.tail_density_inequality_probe(p, prof, 0.1,
                                          np.linspace(0.0, 12.0, 201))
    assert abs(r2.M_hat - r1.M_hat) <= 0.05 * r1.M_hat


def test_tail_density_epsilon_collapse():
    p = AtomicDistribution.from_weights(np.array([0.0]), np.array([1.0]))
    prof = SubgaussianProfile(K=1.0)
    beta = tb.beta_exponent(1.0)
    rep = tb.tail_density_inequality_probe(p, prof, beta * (1 - 1e-9),
                                           np.linspace(0.0, 8.0, 81))
    # exponent -> 0 makes the envelope sup(1-F) <= 1 up to density normalizers
    assert rep.M_hat <= 1.0 + 1e-6


def test_tightness_at_two_point_crossover():
    K, h = 2.0, 20.0
    p = cons.bernoulli_two_point(h, K)
    prof = SubgaussianProfile(K=K)
    r = (K * K + 1) * h / (2 * K * K)
    beta = tb.beta_exponent(K)
    rep = tb.tail_density_inequality_probe(p, prof, 0.01, np.array([r]))
    assert abs(rep.ratio[0] - beta) <= 0.1 * beta


def test_density_lower_probe():
    p0 = AtomicDistribution.from_weights(np.array([0.0]), np.array([1.0]))
    prof = SubgaussianProfile(K=1.0)
    rep = tb.density_tail_lower_probe(p0, prof, 0.1, np.linspace(0, 5, 21))
    assert rep.passed                      # empty tails count as +inf ratios
    p = cons.bernoulli_two_point(4.0, 2.0)
    rep = tb.density_tail_lower_probe(p, SubgaussianProfile(K=2.0), 0.1,
                                      np.linspace(0.0, 8.0, 81))
    assert rep.passed and rep.C_hat > 0
    c = cons.chi2_admissible_c(2.0)
    hard = cons.chi2_hard_example(2.0, c, 7)
    grid = np.linspace(0.0, float(hard.locations[6]), 200)
    rep = tb.density_tail_lower_probe(hard, SubgaussianProfile(K=2.0), 0.1,
                                      grid)
    assert rep.passed and rep.C_hat > 0


def test_interval_prob_bounds_first_level():
    dist, sch = cons.w2_hard_example(2.0, 1.0, 4)
    b = tb.interval_prob_bounds(sch, dist, 1.0, 1)
    assert b.lower_ok and b.C_l_hat >= 1.0 / (4.0 * math.pi)
    for k in (1, 2, 3, 4):
        bb = tb.interval_prob_bounds(sch, dist, 1.0, k)
        assert bb.log_lower_prob <= 0.0 and bb.log_upper_prob <= 0.0
        assert bb.log_lower_prob <= bb.log_upper_prob


def test_interval_prob_matches_monte_carlo():
    dist, sch = cons.w2_hard_example(2.0, 1.0, 4)
    b = tb.interval_prob_bounds(sch, dist, 1.0, 1)
    prob = math.exp(b.log_lower_prob)
    assert prob >= 1e-5
    m = SmoothedMixture(dist, 1.0)
    n = 10_000_000
    x = m.sample(n, 123).samples
    hits = np.count_nonzero((x >= b.probe + 1.0) & (x <= b.probe + 2.0))
    est = hits / n
    se = math.sqrt(est * (1 - est) / n)
    assert abs(est - prob) <= 4 * se


def test_upper_interval_constant_not_reusable_across_levels():
    # the implied upper constant shrinks super-exponentially with the level,
    # so sample sizes use the max over levels as a safe envelope
    dist, sch = cons.w2_hard_example(2.0, 1.0, 4)
    logs = [tb.interval_prob_bounds(sch, dist, 1.0, k).log_C_u_hat
            for k in (1, 2, 3)]
    assert logs[0] > logs[1] > logs[2]
    assert max(sch.C_u_emp) == pytest.approx(math.exp(logs[0]))


def test_interval_prob_guards():
    dist, sch = cons.w2_hard_example(2.0, 1.0, 4)
    with pytest.raises(ValueError):
        tb.interval_prob_bounds(sch, dist, 1.0, 0)
    with pytest.raises(ValueError):
        tb.interval_prob_bounds(sch, dist, 1.0, 5)
