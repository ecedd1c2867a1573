from fractions import Fraction
from itertools import product

import pytest

from fireprop import chain, coupling
from fireprop.chain import ChainTerminated
from fireprop.coupling import CoupledState


def test_single_front_rows():
    law = coupling.coupled_transition_distribution(CoupledState(1, 0, 2, 1, 0))
    assert sum(law.values()) == 1
    marg = coupling.marginalize(law)
    assert marg[(-1, 0, -1, 1)] == Fraction(1, 2)
    assert marg[(-1, 0, 1, 0)] == Fraction(1, 2)


def test_idle_degree_three_split():
    law = coupling.coupled_transition_distribution(CoupledState(0, 0, 3, 5, 0))
    dx1 = {}
    for d, p in law.items():
        dx1[d[0]] = dx1.get(d[0], 0) + p
    assert dx1 == {1: Fraction(1, 2), 3: Fraction(1, 2)}


def test_marginalization_small_grid():
    for x1, x2, u, v in product(range(5), range(5), range(6), range(4)):
        if u + v + x1 + x2 == 0 or (3 * u + x1 + x2) % 2:
            continue
        if x1 + x2 == 0 and 3 * u + 4 * v < 4:
            continue
        law = coupling.coupled_transition_distribution(CoupledState(x1, x2, x1 + 2, u, v))
        expect = chain.transition_distribution(chain.ChainState(u, v, x1 + x2)).as_dict()
        assert coupling.marginalize(law) == expect


def test_walk_pushed_off_barrier():
    law = coupling.coupled_transition_distribution(CoupledState(0, 1, 2, 3, 1))
    assert all(d[2] == 1 for d in law)


def test_errors():
    with pytest.raises(ValueError):
        coupling.coupled_transition_distribution(CoupledState(1, 0, 1, 1, 0))
    with pytest.raises(ChainTerminated):
        coupling.coupled_transition_distribution(CoupledState(0, 0, 2, 0, 0))


def test_anchor():
    assert coupling.anchor(CoupledState(3, 1, 9, 2, 0)).y == 5
    assert coupling.anchor(CoupledState(0, 1, 9, 2, 0)).y == 2


def test_marginal_state():
    s = CoupledState(2, 1, 4, 5, 6, n1=1, n2=2, step=7, lt=4)
    assert s.marginal() == chain.ChainState(5, 6, 3, 3, 7, 4)


def test_run_matches_chain_marginal(backend):
    for seed in range(10):
        c = coupling.run_coupled(300, 17, seed, backend=backend)
        assert c.domination_violations == 0
        assert c.stack_violations == 0
        assert c.n1 + c.n2 == c.clashes
        assert c.zeta <= 3 * 300 + 4 * 17


def test_coupled_backends_identical():
    from fireprop import kernels
    if len(kernels.BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    for seed in range(5):
        a = coupling.run_coupled(200, 14, seed, backend="python")
        b = coupling.run_coupled(200, 14, seed, backend="cython")
        assert a == b
