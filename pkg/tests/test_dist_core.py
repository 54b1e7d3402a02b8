import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import log_ndtr

from sotlab.dist_core import (AtomicDistribution, EmpiricalMeasure,
                              SmoothedMixture, gaussian_tail_bound_check,
                              log1mexp, logdiffexp, mixture_cdf,
                              mixture_log_pdf, mixture_quantile)

from conftest import random_mixture

mixtures = st.builds(
    lambda seed, n, sigma: random_mixture(np.random.default_rng(seed), n, sigma),
    st.integers(0, 10_000), st.integers(1, 5), st.floats(0.3, 2.0))


def test_log1mexp_and_logdiffexp():
    x = np.array([-1e-20, -1e-5, -1.0, -50.0, -1000.0])
    np.testing.assert_allclose(np.exp(log1mexp(x)), -np.expm1(x), rtol=1e-12)
    la, lb = np.array([0.0, -3.0]), np.array([-1.0, -3.0])
    got = logdiffexp(la, lb)
    assert got[1] == -math.inf
    assert math.isclose(math.exp(got[0]), 1.0 - math.exp(-1.0), rel_tol=1e-12)


@settings(max_examples=25, deadline=None)
@given(mixtures)
def test_density_bounded_by_kernel_peak(m):
    t = np.linspace(-10, 10, 200)
    assert np.all(m.pdf(t) <= 1.0 / (math.sqrt(2 * math.pi) * m.sigma) + 1e-12)


@settings(max_examples=25, deadline=None)
@given(mixtures, st.floats(-6, 6), st.floats(1e-9, 3.0))
def test_cdf_strictly_increasing(m, t, gap):
    a, b = t, t + max(gap, 1e-9)
    assert m.cdf(np.array([b]))[0] > m.cdf(np.array([a]))[0] or \
        m.cdf(np.array([a]))[0] in (0.0, 1.0)


@settings(max_examples=25, deadline=None)
@given(mixtures)
def test_quantile_cdf_roundtrip(m):
    u = np.array([1e-10, 1e-6, 0.01, 0.25, 0.5, 0.75, 0.99, 1 - 1e-6, 1 - 1e-10])
    x = m.quantile(u)
    assert np.max(np.abs(m.cdf(x) - u)) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(mixtures, st.floats(-20, 20))
def test_translation_equivariance(m, c):
    shifted = SmoothedMixture(m.base.shift(c), m.sigma)
    u = np.array([0.05, 0.3, 0.5, 0.9])
    np.testing.assert_allclose(shifted.quantile(u), m.quantile(u) + c,
                               rtol=0, atol=1e-9 * (1 + abs(c)))


def test_duplicate_atom_merge_preserves_density():
    b = AtomicDistribution.from_samples(np.array([0.0, 0.0, 0.0, 1.0, 1.0]))
    mb = SmoothedMixture(b, 1.0)
    ref = SmoothedMixture(AtomicDistribution.from_weights(
        np.array([0.0, 1.0]), np.array([0.6, 0.4])), 1.0)
    t = np.linspace(-5, 6, 101)
    np.testing.assert_allclose(mb.pdf(t), ref.pdf(t), atol=1e-14)
    np.testing.assert_allclose(mb.cdf(t), ref.cdf(t), atol=1e-14)
    assert b.n_atoms == 2


def test_deep_tail_matches_gaussian_closed_form(std_normal):
    t = np.array([10.0, 20.0, 30.0])
    np.testing.assert_allclose(std_normal.log_sf(t), log_ndtr(-t), rtol=1e-13)
    np.testing.assert_allclose(std_normal.log_cdf(-t), log_ndtr(-t), rtol=1e-13)


def test_log_interval_prob_deep_tails(std_normal):
    got = std_normal.log_interval_prob(20.0, 21.0)
    oracle = log_ndtr(-20.0) + math.log1p(
        -math.exp(log_ndtr(-21.0) - log_ndtr(-20.0)))
    assert math.isclose(got, oracle, rel_tol=1e-12)
    sym = std_normal.log_interval_prob(-21.0, -20.0)
    assert math.isclose(got, sym, rel_tol=1e-12)


def test_json_roundtrip(rng):
    m = random_mixture(rng)
    m2 = SmoothedMixture.from_json_obj(json.loads(json.dumps(m.to_json_obj())))
    np.testing.assert_array_equal(m.base.locations, m2.base.locations)
    np.testing.assert_array_equal(m.base.log_weights, m2.base.log_weights)
    assert m.sigma == m2.sigma


def test_sampling_deterministic(rng):
    m = random_mixture(rng)
    s1 = m.sample(100, 42).samples
    s2 = m.sample(100, 42).samples
    np.testing.assert_array_equal(s1, s2)
    with pytest.raises(ValueError):
        m.sample(100, None)


def test_atomic_validation():
    with pytest.raises(ValueError):
        AtomicDistribution.from_weights(np.array([1.0, 0.0]),
                                        np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        AtomicDistribution.from_log_weights(
            np.array([0.0, 1.0]), np.log(np.array([0.5, 0.6])))
    with pytest.raises(ValueError):
        AtomicDistribution.from_weights(np.array([0.0]), np.array([-1.0]))


def test_empirical_measure_cdf():
    e = EmpiricalMeasure(np.array([1.0, 2.0, 3.0]))
    assert e.n == 3
    np.testing.assert_allclose(e.cdf(np.array([0.0, 1.0, 2.5, 5.0])),
                               [0.0, 1 / 3, 2 / 3, 1.0])


def test_module_level_wrappers(std_normal):
    t = np.array([0.5])
    assert mixture_log_pdf(std_normal, t)[0] == std_normal.log_pdf(t)[0]
    assert mixture_cdf(std_normal, t)[0] == std_normal.cdf(t)[0]
    u = np.array([0.3])
    assert mixture_quantile(std_normal, u)[0] == std_normal.quantile(u)[0]


def test_gaussian_tail_bound():
    rep = gaussian_tail_bound_check(np.linspace(0.0, 10.0, 101))
    assert rep.passed
    with pytest.raises(ValueError):
        gaussian_tail_bound_check(np.array([-1.0]))
