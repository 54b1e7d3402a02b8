import math

import numpy as np
import pytest

from sotlab import constructions as cons
from sotlab import experiments as exp
from sotlab.dist_core import AtomicDistribution


def point_mass():
    return AtomicDistribution.from_weights(np.array([0.0]), np.array([1.0]))


def synthetic_series(slope, ns, noise=0.0, rng=None):
    pts = []
    for n in ns:
        est = float(n) ** slope
        if noise and rng is not None:
            est *= math.exp(noise * rng.standard_normal())
        pts.append((n, est, noise * est if noise else 1e-12 * est, 100))
    return exp.RateSeries(points=tuple(pts))


def test_fit_rate_exact():
    fit = exp.fit_rate(synthetic_series(-1.0, (64, 128, 256, 512)))
    assert abs(fit.slope + 1.0) <= 1e-12
    assert fit.r_squared >= 1.0 - 1e-12


def test_fit_rate_noisy():
    rng = np.random.default_rng(3)
    ns = tuple(2 ** k for k in range(6, 16))
    fit = exp.fit_rate(synthetic_series(-0.5, ns, noise=0.01, rng=rng))
    assert -0.52 <= fit.slope <= -0.48
    assert fit.slope_stderr > 0


def test_fit_rate_guards():
    with pytest.raises(ValueError):
        exp.fit_rate(synthetic_series(-1.0, (64, 128)))
    bad = exp.RateSeries(points=((64, 1.0, 0.1, 10), (128, 0.0, 0.1, 10),
                                 (256, 0.25, 0.1, 10)))
    with pytest.raises(ValueError) as ei:
        exp.fit_rate(bad)
    assert "1" in str(ei.value)


def test_point_mass_trivials():
    res = exp.mc_expected_w2sq(point_mass(), 1.0, 32, 8, 7)
    assert res.estimate <= 1e-12
    kl = exp.mc_expected_kl(point_mass(), 1.0, 32, 8, 7)
    assert kl.estimate <= 1e-10


def test_mc_values_deterministic_and_workers_agree():
    p = cons.bernoulli_two_point(2.0, 2.0)
    v1 = exp.mc_w2sq_values(p, 1.0, 64, 8, 11, workers=1)
    v2 = exp.mc_w2sq_values(p, 1.0, 64, 8, 11, workers=4)
    np.testing.assert_array_equal(v1, v2)
    assert np.all(v1 > 0)


def test_expected_w2sq_decreases_with_n():
    p = cons.bernoulli_two_point(2.0, 2.0)
    prev = None
    for n in (64, 256, 1024):
        est, se = exp.mc_expected_w2sq(p, 1.0, n, 60, 5)
        if prev is not None:
            assert est <= prev[0] + prev[1] + se
        prev = (est, se)


def test_solve_delta():
    d = exp.solve_delta(2.0, 1.0, 0.02)
    assert 0.0 < d < 0.5
    d2 = exp.solve_delta(2.0, 1.0, 0.08)
    assert d2 > d            # looser rate target allows a larger perturbation
    assert math.isclose(exp.zeta_constant(2.0, 1.0), 25.0 / 128.0,
                        rel_tol=1e-14)


def test_scan_h_increases_with_n():
    d = exp.solve_delta(2.0, 1.0, 0.02)
    hs = [exp.scan_h(n, 2.0, 1.0, d) for n in (128, 1024, 8192)]
    assert hs[0] < hs[1] < hs[2]


def test_bernoulli_scan_plan():
    plan, series = exp.bernoulli_scan(2.0, 1.0, 0.02, (128, 256), 10, 21)
    assert plan.K == 2.0 and 0 < plan.delta < 0.5
    assert len(plan.records) == 2 == len(series.points)
    for rec, (n, est, se, trials) in zip(plan.records, series.points):
        assert rec.n == n and est > 0 and trials == 10
        assert rec.t == pytest.approx(rec.h / 2 + rec.h / 8)  # sigma^2/(2K^2)
    with pytest.raises(ValueError):
        exp.bernoulli_scan(0.5, 1.0, 0.02, (128,), 4, 1)


def test_phase_scan():
    assert exp.phase_scan([], 1.0, "two_point", (64, 128, 256), 8, 3) == []
    rows = exp.phase_scan([0.7], 1.0, "two_point", (128, 512, 2048), 60, 3,
                          h=1.0, workers=4)
    assert len(rows) == 1
    assert -1.2 <= rows[0]["slope"] <= -0.7   # K < sigma: parametric regime
    with pytest.raises(ValueError):
        exp.phase_scan([1.0], 1.0, "nope", (64, 128, 256), 8, 3)
