from collections import Counter

import numpy as np
import pytest
from scipy import stats

from fireprop import oracle
from fireprop.oracle import Multigraph


def test_pairing_is_involution():
    g = oracle.sample_configuration(10, 3, 1)
    h = np.arange(g.n_half_edges)
    assert np.all(g.pairing[g.pairing] == h)
    assert np.all(g.pairing != h)
    assert g.n_edges == (30 + 12) // 2


def test_two_vertices_two_pairings_frequency():
    # 6 half-edges: 15 perfect matchings; one of them is the triple edge
    counts = Counter()
    for s in range(3000):
        g = oracle.sample_configuration(2, 0, s)
        multi = sum(1 for a, b in g.edge_vertices() if a != b)
        counts[multi] += 1
    # all three edges between the two vertices: 6 of 15 matchings
    assert abs(counts[3] / 3000 - 6 / 15) < 0.04
    assert abs(counts[1] / 3000 - 9 / 15) < 0.04


def test_edge_count_with_degree_four():
    assert oracle.sample_configuration(2, 1, 0).n_edges == 5


def test_odd_degree_sum_rejected():
    with pytest.raises(ValueError):
        oracle.sample_configuration(1, 0, 0)


def test_validation_errors():
    with pytest.raises(ValueError):
        Multigraph([2], [0, 1])
    with pytest.raises(ValueError):
        Multigraph([2, 2], [1, 0, 3, 2], lengths=[1.0, -1.0])
    with pytest.raises(ValueError):
        Multigraph([2, 2], [1, 0, 3, 2], lengths=[1.0])
    with pytest.raises(ValueError):
        Multigraph([2, 2], [1, 2, 3, 0])


def test_line_format_round_trip():
    g = oracle.assign_lengths(oracle.sample_configuration(6, 2, 5), 6)
    h = Multigraph.loads(g.dumps())
    assert np.array_equal(g.degrees, h.degrees)
    assert np.array_equal(g.pairing, h.pairing)
    assert np.array_equal(g.lengths, h.lengths)
    bare = oracle.sample_configuration(4, 0, 2)
    assert Multigraph.loads(bare.dumps()).lengths is None


def test_line_format_errors():
    with pytest.raises(ValueError):
        Multigraph.loads("not a graph\n")
    g = oracle.sample_configuration(2, 0, 0)
    text = g.dumps().rsplit("\n", 2)[0] + "\n"
    with pytest.raises(ValueError):
        Multigraph.loads(text)


def test_burn_needs_lengths():
    with pytest.raises(ValueError):
        oracle.burn(oracle.sample_configuration(4, 0, 0), 0)


def test_burned_total_equals_length():
    for s in range(30):
        r = oracle.burn_random(20, 4, s)
        assert r.total_burned == pytest.approx(r.total_length, rel=1e-9)
        assert r.fires >= 1 and r.clashes >= 1


def test_burn_deterministic():
    a = oracle.burn_random(30, 5, 123)
    b = oracle.burn_random(30, 5, 123)
    assert (a.fires, a.clashes, a.total_burned) == (b.fires, b.clashes, b.total_burned)


def test_event_log_times_sorted():
    g = oracle.assign_lengths(oracle.sample_configuration(12, 2, 3), 4)
    r = oracle.burn(g, 5, log=True)
    times = [e[0] for e in r.event_log]
    assert times == sorted(times)


def test_dirichlet_split_and_merge_preserve_law():
    # size-biased split of Dir(1,1) gives Dir(1,1,1)
    rng = np.random.default_rng(0)
    split = np.array([oracle.dirichlet_split(rng.dirichlet([1, 1]), s)[0] for s in range(4000)])
    assert stats.kstest(split, stats.beta(1, 2).cdf).pvalue > 0.001
    merge = np.array([oracle.dirichlet_merge(rng.dirichlet([1, 1, 1]), s)[0] for s in range(4000)])
    # first coordinate after merging is Beta(2,1) or Beta(1,2) with probability 1/2 each
    mix = lambda x: 0.5 * stats.beta(1, 2).cdf(x) + 0.5 * stats.beta(2, 1).cdf(x)  # noqa: E731
    assert stats.kstest(merge, mix).pvalue > 0.001


def test_dirichlet_errors():
    with pytest.raises(ValueError):
        oracle.dirichlet_split([], 0)
    with pytest.raises(ValueError):
        oracle.dirichlet_merge([1.0], 0)
