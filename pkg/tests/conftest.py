import numpy as np
import pytest

from sotlab.dist_core import AtomicDistribution, SmoothedMixture


def random_mixture(rng, n_atoms=None, sigma=None, span=4.0):
    n_atoms = n_atoms or int(rng.integers(2, 5))
    sigma = sigma or float(rng.uniform(0.7, 1.5))
    locs = np.sort(rng.uniform(-span, span, n_atoms))
    while np.any(np.diff(locs) < 1e-3):
        locs = np.sort(rng.uniform(-span, span, n_atoms))
    w = rng.dirichlet(np.ones(n_atoms))
    return SmoothedMixture(AtomicDistribution.from_weights(locs, w), sigma)


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


@pytest.fixture
def std_normal():
    return SmoothedMixture(AtomicDistribution.from_weights(
        np.array([0.0]), np.array([1.0])), 1.0)
