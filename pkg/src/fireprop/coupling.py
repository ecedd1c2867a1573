"""Stacked chain (X1, X2, Y, U, V, N1, N2) with a reflected-walk dominator.

Burning half-edges are split into two stacks. Stack 2 only ever receives
one half-edge per degree-4 vertex, and Y is a simple symmetric walk
reflected upward at 2 that dominates stack 1 pathwise.

Where the printed tables merge the two absorption outcomes into one row, the
row is split here so (U, V) can be tracked: absorbed at a degree-3 vertex
moves U by -1, absorbed at a degree-4 vertex moves (U, V) by (+1, -1).
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from . import kernels
from ._pykernels import _pick, coupled_weights
from .chain import ChainState, ChainTerminated, RunSummary, new_chain
from .rng import SplitMix64

Delta7 = tuple[int, int, int, int, int, int, int]  # dx1, dx2, dy, du, dv, dn1, dn2


@dataclass(frozen=True)
class CoupledState:
    x1: int
    x2: int
    y: int
    u: int
    v: int
    n1: int = 0
    n2: int = 0
    step: int = 0
    lt: int = 0

    @property
    def x(self) -> int:
        return self.x1 + self.x2

    @property
    def absorbed(self) -> bool:
        return self.u + self.v + self.x == 0

    def marginal(self) -> ChainState:
        return ChainState(self.u, self.v, self.x, self.n1 + self.n2, self.step, self.lt)


def initial_coupled(n: int, alpha: int) -> CoupledState:
    s = new_chain(n, alpha)
    return CoupledState(0, 0, 2, s.u, s.v)


def anchor(state: CoupledState) -> CoupledState:
    """Restart the dominating walk just above stack 1."""
    return replace(state, y=state.x1 + 2 if state.x1 > 0 else 2)


def _rows(state: CoupledState):
    if state.absorbed:
        raise ChainTerminated("chain already terminated")
    if state.y < 2:
        raise ValueError(f"dominating walk below its barrier: y={state.y}")
    return coupled_weights(state.x1, state.x2, state.u, state.v)


def coupled_transition_distribution(state: CoupledState) -> dict[Delta7, Fraction]:
    """Exact law over 7-component increments (y == 2 forces dy = +1)."""
    rows, weights, total = _rows(state)
    law: dict[Delta7, Fraction] = defaultdict(Fraction)
    for d, w in zip(rows, weights):
        if w:
            if state.y == 2:
                d = (d[0], d[1], 1, *d[3:])
            law[d] += Fraction(w, total)
    return dict(law)


def marginalize(law: dict[Delta7, Fraction]) -> dict[tuple[int, int, int, int], Fraction]:
    """Project a coupled law onto (du, dv, dx, dn) of the four-dimensional chain."""
    out: dict[tuple[int, int, int, int], Fraction] = defaultdict(Fraction)
    for (dx1, dx2, _, du, dv, dn1, dn2), p in law.items():
        out[(du, dv, dx1 + dx2, dn1 + dn2)] += p
    return dict(out)


def coupled_step(state: CoupledState, rng: SplitMix64) -> CoupledState:
    rows, weights, total = _rows(state)
    dx1, dx2, dy, du, dv, dn1, dn2 = rows[_pick(weights, rng.below(total))]
    if state.y == 2:
        dy = 1
    return CoupledState(
        state.x1 + dx1,
        state.x2 + dx2,
        state.y + dy,
        state.u + du,
        state.v + dv,
        state.n1 + dn1,
        state.n2 + dn2,
        state.step + 1,
        state.lt + (2 if state.x == 0 else 0),
    )


@dataclass
class CoupledSummary(RunSummary):
    max_x1: int = 0
    max_x2: int = 0
    max_y: int = 0
    n1: int = 0
    n2: int = 0
    domination_violations: int = 0
    stack_violations: int = 0
    y_up: int = 0
    y_down: int = 0


def run_coupled(n: int, alpha: int, seed: int, backend: Optional[str] = None) -> CoupledSummary:
    new_chain(n, alpha)
    (fires, clashes, zeta, mx1, mx2, my, n1, n2, dom_bad, stack_bad, y_up, y_down) = kernels.get(backend).run_coupled(
        n, alpha, seed
    )
    return CoupledSummary(
        n, alpha, int(fires), int(clashes), int(zeta),
        max_x=int(mx1 + mx2),  # an upper bound for sup X, not its value
        max_x1=int(mx1), max_x2=int(mx2), max_y=int(my), n1=int(n1), n2=int(n2),
        domination_violations=int(dom_bad), stack_violations=int(stack_bad),
        y_up=int(y_up), y_down=int(y_down),
    )
