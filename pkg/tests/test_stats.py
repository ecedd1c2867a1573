import math

import numpy as np
import pytest

from fireprop import stats


def test_ks_identical_samples():
    x = np.arange(100.0)
    r = stats.ks_two_sample(x, x)
    assert r.statistic == 0 and r.passed


def test_ks_detects_shift():
    rng = np.random.default_rng(0)
    r = stats.ks_two_sample(rng.normal(size=2000), rng.normal(0.5, size=2000))
    assert not r.passed


def test_ks_one_sample_uniform():
    rng = np.random.default_rng(1)
    assert stats.ks_one_sample(rng.random(5000), lambda x: x).passed


def test_chi_square_exact_frequencies():
    law = {"a": 0.5, "b": 0.3, "c": 0.2}
    r = stats.chi_square_joint({"a": 500, "b": 300, "c": 200}, law)
    assert r.statistic == pytest.approx(0.0)
    assert r.dof == 2


def test_chi_square_outside_support_fails():
    r = stats.chi_square_joint({"a": 10, "z": 1}, {"a": 1.0})
    assert not r.passed


def test_chi_square_bad_law():
    with pytest.raises(ValueError):
        stats.chi_square_joint({"a": 1}, {"a": 0.5})


def test_two_sample_chi_square():
    a = {1: 100, 2: 200}
    assert stats.chi_square_two_sample(a, dict(a)).statistic == pytest.approx(0.0)
    assert not stats.chi_square_two_sample({1: 300, 2: 100}, {1: 100, 2: 300}).passed


def test_empirical_summary():
    mean, var, (lo, hi) = stats.empirical_summary([1.0, 2.0, 3.0])
    assert mean == 2.0 and var == 1.0
    assert lo < 2.0 < hi
    with pytest.raises(ValueError):
        stats.empirical_summary([1.0])
    with pytest.raises(ValueError):
        stats.empirical_summary([1.0, 1.0])


def test_slope_fit():
    pts = [(math.log(n), 0.2 * math.log(n) + 1) for n in (10, 100, 1000)]
    s, se = stats.slope_fit(pts)
    assert s == pytest.approx(0.2)
    assert se == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        stats.slope_fit([(1, 1)])


def test_report_serialises():
    r = stats.ks_two_sample([0.0, 1.0], [0.0, 1.0])
    assert r.line().startswith("PASS")
    assert '"passed": true' in r.to_json()
