import math

import numpy as np
import pytest

from sotlab import concentration as conc
from sotlab import constructions as cons
from sotlab.dist_core import AtomicDistribution, SmoothedMixture


def test_statistic_affine_invariance(std_normal):
    sample = std_normal.sample(256, 11)
    s0 = conc.weighted_cdf_statistic(std_normal, sample)
    a, b = 2.5, -1.0
    mapped = SmoothedMixture(std_normal.base.scale(a).shift(b),
                             std_normal.sigma * a)
    from sotlab.dist_core import EmpiricalMeasure
    mapped_sample = EmpiricalMeasure(np.sort(a * sample.samples + b))
    s1 = conc.weighted_cdf_statistic(mapped, mapped_sample)
    assert math.isclose(s0, s1, rel_tol=1e-9)


def test_statistic_decreases_with_n(std_normal):
    meds = {}
    for n in (256, 4096):
        children = np.random.SeedSequence(5).spawn(200)
        stats = [conc.weighted_cdf_statistic(
            std_normal, std_normal.sample(n, np.random.default_rng(c)))
            for c in children]
        meds[n] = float(np.median(stats))
    assert meds[4096] <= meds[256]


def test_weighted_concentration_rate(std_normal):
    rep = conc.weighted_cdf_concentration(std_normal, 256, 0.1, 60, 3)
    assert rep.violation_rate <= 0.1
    assert len(rep.statistics) == 60
    rep2 = conc.weighted_cdf_concentration(std_normal, 256, 0.1, 60, 3)
    assert rep.statistics == rep2.statistics


def test_smoothed_sample_variant(std_normal):
    emp = std_normal.sample(64, 9).to_atomic()
    s = conc.weighted_cdf_statistic(std_normal, SmoothedMixture(emp, 1.0),
                                    n=64)
    assert s >= 0
    with pytest.raises(ValueError):
        conc.weighted_cdf_statistic(std_normal, SmoothedMixture(emp, 1.0))


def test_berry_esseen_event():
    p_h = math.exp(-9.0 / 8.0)
    n = 2 * math.ceil(128 / p_h)
    fr = conc.berry_esseen_event_frequency(3.0, 2.0, 1.0, n, 500, 17)
    assert fr.applicable and fr.passed
    fr2 = conc.berry_esseen_event_frequency(3.0, 2.0, 1.0, n, 500, 17)
    assert fr.frequency == fr2.frequency


def test_berry_esseen_guards():
    with pytest.raises(ValueError):
        conc.berry_esseen_event_frequency(0.5, 2.0, 1.0, 10_000, 10, 1)
    fr = conc.berry_esseen_event_frequency(3.0, 2.0, 1.0, 100, 10, 1)
    assert not fr.applicable and fr.frequency is None
    with pytest.raises(ValueError):
        conc.berry_esseen_event_frequency(3.0, 2.0, 1.0, 1000, 0, 1)


def test_schedule_gap_dominance():
    dist, sch = cons.w2_hard_example(2.0, 1.0, 4)
    p2 = math.exp(sch.log_p_k[1])
    n = math.ceil(2 * 32768 / p2)
    fr = conc.schedule_gap_dominance(sch, dist, 1.0, 1, 300, 13, n=n)
    assert fr.applicable and fr.passed
    fr2 = conc.schedule_gap_dominance(sch, dist, 1.0, 1, 300, 13, n=n)
    assert fr.frequency == fr2.frequency


def test_schedule_gap_guards():
    dist, sch = cons.w2_hard_example(2.0, 1.0, 4)
    # level 2's schedule n overflows -> not applicable
    fr = conc.schedule_gap_dominance(sch, dist, 1.0, 2, 10, 1)
    assert not fr.applicable and "infeasible" in fr.diagnostic
    # explicit n below the event threshold
    fr = conc.schedule_gap_dominance(sch, dist, 1.0, 1, 10, 1, n=100)
    assert not fr.applicable
    with pytest.raises(ValueError):
        conc.schedule_gap_dominance(sch, dist, 1.0, 1, 0, 1)
    with pytest.raises(ValueError):
        conc.schedule_gap_dominance(sch, dist, 1.0, 4, 10, 1)
