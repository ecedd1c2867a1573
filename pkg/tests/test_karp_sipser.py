from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fireprop import karp_sipser as ks
from fireprop.karp_sipser import SimpleGraph


def complete(n):
    return SimpleGraph(n, list(combinations(range(n), 2)))


def test_complete_four():
    r = ks.karp_sipser_run(complete(4), 0)
    assert r.size == 2
    assert r.made_random_choice
    assert r.phase2_start_vertices == frozenset(range(4))
    assert r.a_n == 0


def test_empty_graph():
    r = ks.karp_sipser_run(SimpleGraph(10, np.zeros((0, 2))), 0)
    assert r.size == 0 and r.unmatched_total == 10 and not r.made_random_choice


def test_path_three():
    r = ks.karp_sipser_run(SimpleGraph(3, [(0, 1), (1, 2)]), 1)
    assert r.size == 1 and not r.made_random_choice and r.a_n == 0


def test_cycles():
    c4 = SimpleGraph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert ks.karp_sipser_run(c4, 0).size == 2
    c5 = SimpleGraph(5, [(i, (i + 1) % 5) for i in range(5)])
    for s in range(10):
        r = ks.karp_sipser_run(c5, s)
        assert r.size == 2 and r.a_n == 1


def test_graph_validation():
    with pytest.raises(ValueError):
        SimpleGraph(3, [(0, 0)])
    with pytest.raises(ValueError):
        SimpleGraph(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        SimpleGraph(3, [(0, 3)])


def test_gnm_exact_edge_count():
    for n, m in [(10, 20), (1000, 2000)]:
        g = ks.sample_gnm(n, m, 0)
        assert g.m == m
    with pytest.raises(ValueError):
        ks.sample_gnm(4, 7, 0)


def _brute_matching(g):
    e = [tuple(x) for x in g.edges.tolist()]
    for k in range(len(e), 0, -1):
        for sub in combinations(e, k):
            vs = [v for ed in sub for v in ed]
            if len(set(vs)) == len(vs):
                return k
    return 0


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2**32))
def test_exact_matching_brute_force(n, seed):
    m = np.random.default_rng(seed).integers(0, min(n * (n - 1) // 2, 12) + 1)
    g = ks.sample_gnm(n, int(m), seed)
    assert ks.max_matching_exact(g) == _brute_matching(g)


def test_exact_matching_limit():
    with pytest.raises(ValueError):
        ks.max_matching_exact(SimpleGraph(25, np.zeros((0, 2))))


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 20), st.integers(0, 2**32))
def test_ks_is_a_matching_and_never_beats_optimum(n, seed):
    g = ks.sample_gnm(n, n, seed)
    r = ks.karp_sipser_run(g, seed)
    vs = [v for e in r.matching for v in e]
    assert len(set(vs)) == len(vs)
    edges = {tuple(e) for e in g.edges.tolist()}
    assert all(e in edges for e in r.matching)
    assert r.size <= ks.max_matching_exact(g)
    if not r.made_random_choice:
        assert r.size == ks.max_matching_exact(g)


def test_forest_is_optimal():
    for s in range(20):
        g = ks.random_forest(20, s)
        r = ks.karp_sipser_run(g, s)
        assert not r.made_random_choice
        assert r.size == ks.max_matching_exact(g)


def test_scaling_experiment_table():
    res = ks.scaling_experiment(4.0, [64, 128], 10, 3)
    assert len(res.rows) == 20
    assert [t[0] for t in res.table] == [64, 128]
    with pytest.raises(ValueError):
        ks.scaling_experiment(0.0, [64], 2, 0)
