import math

import numpy as np
import pytest
from scipy import stats

from fireprop import limit


def test_fluid_endpoints():
    assert limit.fluid_curves(0.0) == pytest.approx((1.0, 1.0, 0.0, 0.0))
    assert limit.fluid_curves(1.0) == pytest.approx((0.0, 0.0, 0.0, 0.25))


def test_fluid_peak():
    t_star = 1 - 2 ** -1.5
    grid = np.linspace(0, 1, 200001)
    x = limit.fluid_curves(grid)[2]
    assert grid[np.argmax(x)] == pytest.approx(t_star, abs=1e-5)
    assert limit.fluid_curves(t_star)[2] == pytest.approx(0.25)


def test_fluid_domain():
    with pytest.raises(ValueError):
        limit.fluid_curves(1.5)
    with pytest.raises(ValueError):
        limit.fluid_curves(np.array([0.1, float("nan")]))


@pytest.mark.parametrize("t", [0.0, 0.3, 0.6, 0.95])
def test_ode_residuals(t):
    assert max(abs(r) for r in limit.ode_residuals(t)) < 1e-6


def test_clock_round_trip():
    t = np.linspace(0, 0.999, 50)
    assert np.allclose(limit.clock_inverse(limit.clock(t)), t)
    assert limit.clock(0.0) == 0.0


def test_tail_bound():
    assert limit.tail_bound(0.0, 3.0) == pytest.approx(0.22313, abs=1e-5)
    assert limit.tail_bound(1.0, 2.0) == pytest.approx(0.84648, abs=1e-5)
    with pytest.raises(ValueError):
        limit.tail_bound(1.0, 1.5)


def test_n1_candidates():
    inf_limit, unit_limit = limit.n1_mean_candidates()
    assert inf_limit == pytest.approx(0.542701, abs=1e-6)
    assert unit_limit == pytest.approx(0.106099, abs=1e-6)


def test_grid_contains_times():
    g = limit.limit_grid(1e-3, 100, times=(0.5, 0.25))
    assert 0.5 in g and 0.25 in g
    assert g[0] == 0 and g[-1] == pytest.approx(1 - 1e-3)
    with pytest.raises(ValueError):
        limit.limit_grid(0.0)


def test_path_invariants():
    p = limit.simulate_limit_path(1.0, 3, eps=1e-3, npts=3000)
    p.check()
    assert p.X[0] == 0 and p.L[0] == 0 and p.N[0] == 0
    assert p.L1 >= 0 and p.N1 > 0


def test_path_csv(tmp_path):
    p = limit.simulate_limit_path(0.5, 1, eps=1e-2, npts=50)
    f = tmp_path / "path.csv"
    p.to_csv(f)
    rows = f.read_text().splitlines()
    assert rows[0] == "t,X,L,N"
    assert len(rows) == len(p.grid) + 1


def test_batch_deterministic_and_chunk_independent():
    a = limit.simulate_limit_batch(1.0, 600, 9, eps=1e-2, npts=200)
    b = limit.simulate_limit_batch(1.0, 600, 9, eps=1e-2, npts=200)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.N1, b.N1)
    c = limit.simulate_limit_batch(1.0, limit.CHUNK, 9, eps=1e-2, npts=200)
    assert np.array_equal(a.X[:limit.CHUNK], c.X)


def test_zero_drift_marginal_is_folded_gaussian():
    t = 0.5
    s = limit.simulate_limit_batch(0.0, 4000, 2, times=(t,), eps=1e-2, npts=400)
    sd = math.sqrt(limit.x0_variance(t))
    cdf = lambda x: 2 * stats.norm.cdf(x / sd) - 1  # noqa: E731
    assert stats.kstest(s.X[:, 0], cdf).pvalue > 0.001


def test_em_matches_explicit():
    e = limit.simulate_limit_em(1.0, 2e-3, 4, reps=3000, times=(0.5,))
    x = limit.simulate_limit_batch(1.0, 3000, 5, times=(0.5,), eps=1e-2, npts=500)
    assert stats.ks_2samp(e.X[:, 0], x.X[:, 0]).pvalue > 0.001


def test_em_full_path():
    p = limit.simulate_limit_em(0.0, 1e-3, 1, full=True)
    p.check()


def test_em_errors():
    with pytest.raises(ValueError):
        limit.simulate_limit_em(1.0, 0.1, 0)
    with pytest.raises(ValueError):
        limit.simulate_limit_em(-1.0, 1e-3, 0)
    with pytest.raises(ValueError):
        limit.simulate_limit_em(1.0, 1e-3, 0, reps=2, full=True)
