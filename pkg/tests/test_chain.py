from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fireprop import chain
from fireprop.chain import ChainState, ChainTerminated


def test_new_chain():
    assert chain.new_chain(4, 0) == ChainState(4, 0, 0)
    assert chain.new_chain(2, 1) == ChainState(2, 1, 0)
    with pytest.raises(ValueError):
        chain.new_chain(3, 0)
    with pytest.raises(ValueError):
        chain.new_chain(4, -1)


def test_burning_drift_example():
    s = ChainState(1, 0, 3)
    du, dv, dx, dn, *_ = chain.expected_increments(s)
    assert dx == pytest.approx(-0.8)
    assert dn == pytest.approx(0.5)


def test_idle_drift_example():
    s = ChainState(2, 1, 0)
    assert chain.expected_increments(s)[2] == pytest.approx(2.2)


def test_absorbed_raises():
    with pytest.raises(ChainTerminated):
        chain.transition_distribution(ChainState(0, 0, 0))


def test_odd_half_edges_rejected():
    with pytest.raises(ValueError):
        chain.transition_distribution(ChainState(1, 0, 0))


states = st.tuples(st.integers(0, 30), st.integers(0, 30), st.integers(0, 30)).filter(
    lambda s: sum(s) > 0 and (3 * s[0] + s[2]) % 2 == 0 and (s[2] > 0 or 3 * s[0] + 4 * s[1] >= 4)
)


@given(states)
def test_integer_law_matches_fractions(s):
    st_ = ChainState(*s)
    a = chain.transition_distribution(st_)
    b = chain.transition_distribution_printed(st_)
    assert a.total() == 1
    assert b.total() == 1
    assert a.as_dict() == b.as_dict()


@given(states)
def test_moments_match_enumeration(s):
    st_ = ChainState(*s)
    closed = chain.expected_increments(st_)
    exact = chain.enumerated_increments(st_)
    assert np.allclose(closed, [float(e) for e in exact], rtol=1e-12, atol=1e-12)


def test_printed_du_disagrees_when_v_positive():
    s = ChainState(2, 2, 0)
    exact = float(chain.enumerated_increments(s)[0])
    assert chain.expected_increments(s)[0] == pytest.approx(exact)
    assert chain.expected_increments(s, printed_du=True)[0] != pytest.approx(exact)


@given(states)
def test_step_conserves_parity(s):
    st_ = ChainState(*s)
    for d in chain.transition_distribution(st_).as_dict():
        nxt = chain.apply(st_, d)
        nxt.check()


def test_terminal_law_sums_to_one():
    for n, a in [(2, 0), (4, 1), (6, 2), (8, 0)]:
        law = chain.terminal_law(n, a)
        assert sum(law.values()) == pytest.approx(1.0)


def test_two_vertices_one_fire():
    law = chain.terminal_law(2, 0)
    assert {f for f, _ in law} == {1}


def test_backends_identical():
    from fireprop import kernels
    if len(kernels.BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    for seed in range(20):
        a = chain.run_to_absorption(200, 14, seed, trace_stride=7, backend="python")
        b = chain.run_to_absorption(200, 14, seed, trace_stride=7, backend="cython")
        assert (a.fires, a.clashes, a.zeta, a.max_x, a.at_n) == (b.fires, b.clashes, b.zeta, b.max_x, b.at_n)
        assert np.array_equal(a.trace, b.trace)


def test_run_matches_manual_steps(backend):
    from fireprop.rng import SplitMix64
    seed = 99
    rng = SplitMix64(seed)
    s = chain.new_chain(40, 6)
    fires = 0
    while not s.absorbed:
        fires += s.x == 0
        s = chain.step(s, rng)
    r = chain.run_to_absorption(40, 6, seed, backend=backend)
    assert (r.fires, r.clashes, r.zeta) == (fires, s.nclash, s.step)


def test_batch_matches_single(backend):
    seeds = [11, 12, 13]
    totals, _, _ = chain.run_batch(100, 10, seeds, backend=backend)
    for row, sd in zip(totals, seeds):
        r = chain.run_to_absorption(100, 10, sd, backend=backend)
        assert tuple(row[:3]) == (r.fires, r.clashes, r.zeta)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 50).map(lambda k: 2 * k), st.integers(0, 20), st.integers(0, 2**64 - 1))
def test_pathwise_bounds(n, alpha, seed):
    r = chain.run_to_absorption(n, alpha, seed)
    assert r.zeta <= 3 * n + 4 * alpha
    assert r.fires >= 1 and r.clashes >= 1


def test_mean_field_start_and_shape():
    out = chain.mean_field_path(1000, 31, [0, 10, 500])
    assert out.shape == (3, 4)
    assert tuple(out[0]) == (1000.0, 31.0, 0.0, 0.0)
    assert np.all(np.diff(out[:, 0]) < 0)


def test_step_n_bounds_need_large_n():
    r = chain.run_to_absorption(2, 0, 0)
    with pytest.raises(chain.EndgameViolation):
        chain.check_endgame(r, step_n=True)
    for seed in range(5):
        chain.run_to_absorption(20000, 141, seed, endgame=True)
