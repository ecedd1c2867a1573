"""The four-dimensional burning chain (U, V, X, N) with local time L.

State ``(u, v, x, nclash)`` counts degree-3 vertices, degree-4 vertices,
burning half-edges and clashes so far. The chain absorbs when
``u + v + x == 0``; the number of fires is ``lt / 2`` at absorption and the
number of clashes is ``nclash``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import kernels
from ._pykernels import BURN_ROWS, IDLE_ROWS, _pick, chain_weights
from .rng import SplitMix64


class ChainTerminated(ValueError):
    """Raised when a transition is requested from an absorbed state."""


@dataclass(frozen=True)
class ChainState:
    u: int
    v: int
    x: int
    nclash: int = 0
    step: int = 0
    lt: int = 0

    @property
    def absorbed(self) -> bool:
        return self.u + self.v + self.x == 0

    @property
    def half_edges(self) -> int:
        return 3 * self.u + 4 * self.v + self.x

    def check(self) -> None:
        if min(self.u, self.v, self.x, self.nclash, self.step, self.lt) < 0:
            raise ValueError(f"negative field in {self}")
        if self.half_edges % 2:
            raise ValueError(f"odd half-edge count 3u+4v+x = {self.half_edges}")
        if self.lt % 2:
            raise ValueError("local time must be even")


Delta = tuple[int, int, int, int]


@dataclass(frozen=True)
class TransitionLaw:
    """Support of one chain step: ``(delta, prob)`` pairs in printed row order."""

    entries: tuple[tuple[Delta, Fraction], ...]

    def total(self) -> Fraction:
        return sum((p for _, p in self.entries), Fraction(0))

    def as_dict(self) -> dict[Delta, Fraction]:
        out: dict[Delta, Fraction] = defaultdict(Fraction)
        for d, p in self.entries:
            out[d] += p
        return dict(out)


@dataclass
class RunSummary:
    n: int
    alpha: int
    fires: int
    clashes: int
    zeta: int
    max_x: int = 0
    # state at step n: (u, v, x, nclash, lt); used by the endgame bounds
    at_n: tuple[int, ...] = ()
    trace_steps: Optional[np.ndarray] = None
    trace: Optional[np.ndarray] = field(default=None, repr=False)


def new_chain(n: int, alpha: int) -> ChainState:
    if n < 2 or n % 2:
        raise ValueError(f"n must be even and >= 2, got {n}")
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    return ChainState(u=n, v=alpha, x=0)


def transition_distribution(state: ChainState) -> TransitionLaw:
    """Exact rational law of the next increment; zero-probability rows omitted."""
    if state.absorbed:
        raise ChainTerminated("chain already terminated")
    state.check()
    rows, weights, total = chain_weights(state.u, state.v, state.x)
    if total <= 0:
        raise AssertionError(f"non-positive denominator at {state}")
    return TransitionLaw(tuple((d, Fraction(w, total)) for d, w in zip(rows, weights) if w))


def transition_distribution_printed(state: ChainState) -> TransitionLaw:
    """Same law evaluated directly from the printed fractions (no common total).

    Kept separate from :func:`transition_distribution` so tests can check the
    integer-weight form against the formulas as written.
    """
    if state.absorbed:
        raise ChainTerminated("chain already terminated")
    u, v, x = state.u, state.v, state.x
    F = Fraction
    if x == 0:
        s = 3 * u + 4 * v
        probs = [
            F(3 * u, 2 * s * (s - 2)),
            F(3 * u * (s - 3), 2 * s * (s - 2)),
            F(3 * u, 2 * s),
            F(4 * v, 2 * s),
            F(4 * v, 2 * s),
        ]
        rows = IDLE_ROWS
    else:
        d1 = 3 * u + 4 * v + x - 1
        d3 = 3 * u + 4 * v + x - 3
        # the 3u/(... d3) rows vanish when u == 0, where d3 may be -1
        loop = F(3 * u, 2 * d1 * d3) if u else F(0)
        absorb = F(3 * u * (d1 - 3), 2 * d1 * d3) if u else F(0)
        probs = [loop, absorb, F(3 * u, 2 * d1), F(4 * v, 2 * d1), F(4 * v, 2 * d1), F(x - 1, d1)]
        rows = BURN_ROWS
    return TransitionLaw(tuple((d, p) for d, p in zip(rows, probs) if p))


def apply(state: ChainState, delta: Delta) -> ChainState:
    du, dv, dx, dn = delta
    return ChainState(
        u=state.u + du,
        v=state.v + dv,
        x=state.x + dx,
        nclash=state.nclash + dn,
        step=state.step + 1,
        lt=state.lt + (2 if state.x == 0 else 0),
    )


def step(state: ChainState, rng: SplitMix64) -> ChainState:
    """Sample one transition by inverse CDF over the ordered rows."""
    if state.absorbed:
        raise ChainTerminated("chain already terminated")
    rows, weights, total = chain_weights(state.u, state.v, state.x)
    return apply(state, rows[_pick(weights, rng.below(total))])


def expected_increments(state: ChainState, printed_du: bool = False) -> tuple[float, ...]:
    """Closed-form conditional moments (dU, dV, dX, dN, d2U, d2V, d2X).

    dU is (2v - 3u) / D: a degree-4 vertex that is hit turns into a degree-3
    vertex only half the time. ``printed_du`` gives (4v - 3u) / D instead,
    the variant that disagrees with the transition law whenever v > 0.
    """
    if state.absorbed:
        raise ChainTerminated("chain already terminated")
    u, v, x = state.u, state.v, state.x
    ind = 1 if x > 0 else 0
    den = 3 * u + 4 * v + x - ind
    du = ((4 if printed_du else 2) * v - 3 * u) / den
    dv = -4 * v / den
    dx = 2 * (1 - ind) + (2 * v - 2 * x + 2 * ind) / den
    dn = (3 * u + 2 * (x - ind) * (3 * u + 4 * v + x - 3)) / (2 * den * (den - 2))
    d2u = (3 * u + 2 * v) / den
    d2v = 4 * v / den
    if x == 0:
        d2x = 5 + 14 * v / (3 * u + 4 * v)
    else:
        d2x = 1 + (6 * v + 3 * x - 3) / (3 * u + 4 * v + x - 1)
    return du, dv, dx, dn, d2u, d2v, d2x


def enumerated_increments(state: ChainState) -> tuple[Fraction, ...]:
    """Brute-force moments by summing over :func:`transition_distribution`."""
    law = transition_distribution(state)
    first = [sum((p * d[k] for d, p in law.entries), Fraction(0)) for k in range(4)]
    second = [sum((p * d[k] ** 2 for d, p in law.entries), Fraction(0)) for k in range(3)]
    return (*first, *second)


def mean_field_path(n: int, alpha: int, steps) -> np.ndarray:
    """Iterate the expected increments deterministically from (n, alpha, 0, 0).

    Returns rows (u, v, x, m) at the requested steps. This is the finite-n
    counterpart of the fluid curves; the chain tracks it much more closely
    than it tracks the n -> infinity limit at moderate n.
    """
    new_chain(n, alpha)
    want = sorted(set(int(k) for k in steps))
    out = {}
    u, v, x, m = float(n), float(alpha), 0.0, 0.0
    for i in range(want[-1] + 1 if want else 0):
        out[i] = (u, v, x, m)
        if u + v + x <= 0:
            break
        ind = 1.0 if x > 0 else 0.0
        den = 3 * u + 4 * v + x - ind
        dx = 2 * (1 - ind) + (2 * v - 2 * x + 2 * ind) / den
        dm = (3 * u + 2 * (x - ind) * (3 * u + 4 * v + x - 3)) / (2 * den * (den - 2))
        u, v, x, m = u + (2 * v - 3 * u) / den, v - 4 * v / den, max(x + dx, 0.0), m + dm
    last = max(out)
    return np.array([out[min(k, last)] for k in steps], dtype=float)


def default_stride(n: int) -> int:
    return max(1, n // 1000)


def run_to_absorption(
    n: int,
    alpha: int,
    seed: int,
    *,
    trace_stride: Optional[int] = None,
    checkpoints=None,
    backend: Optional[str] = None,
    endgame: bool = False,
) -> RunSummary:
    """Run one chain to absorption and check the crude pathwise bounds.

    ``trace_stride`` stores every k-th state; ``checkpoints`` stores the state
    at arbitrary step indices (both end up in ``trace_steps`` / ``trace``).
    ``endgame`` also asserts the step-n bounds (see :func:`check_endgame`).
    """
    new_chain(n, alpha)
    bound = 3 * n + 4 * alpha
    steps = {n}
    if trace_stride is not None:
        steps.update(range(0, bound + 1, max(1, int(trace_stride))))
    if checkpoints is not None:
        steps.update(int(c) for c in checkpoints)
    cps = np.array(sorted(steps), dtype=np.int64)
    fires, clashes, zeta, max_x, snaps = kernels.get(backend).run_chain(n, alpha, seed, cps)
    at_n = tuple(int(a) for a in snaps[np.searchsorted(cps, n)])
    summary = RunSummary(n, alpha, int(fires), int(clashes), int(zeta), int(max_x), at_n)
    check_endgame(summary, endgame)
    if trace_stride is not None or checkpoints is not None:
        summary.trace_steps = cps
        summary.trace = snaps
    return summary


class EndgameViolation(AssertionError):
    pass


def check_endgame(s: RunSummary, step_n: bool = False) -> None:
    """Crude step bound always; with ``step_n`` also the step-n endgame bounds.

    The step-n bounds drop the X(n) half-edges, so they can fail when X(n) is
    not small against alpha (n = 2, alpha = 0 already breaks them). They are
    meant for large-n runs only.
    """
    u_n, _, _, m_n, _ = s.at_n
    if s.zeta > 3 * s.n + 4 * s.alpha:
        raise EndgameViolation(f"zeta={s.zeta} exceeds 3n+4alpha")
    if s.fires < 1 or s.clashes < 1:
        raise EndgameViolation(f"fires={s.fires}, clashes={s.clashes} must both be >= 1")
    if not step_n:
        return
    if s.zeta - s.n > 3 * m_n + 13 * s.alpha:
        raise EndgameViolation(f"zeta-n={s.zeta - s.n} exceeds 3N(n)+13alpha={3 * m_n + 13 * s.alpha}")
    if u_n > m_n + 3 * s.alpha:
        raise EndgameViolation(f"U(n)={u_n} exceeds N(n)+3alpha={m_n + 3 * s.alpha}")


def run_batch(n: int, alpha: int, seeds, checkpoints=(), backend: Optional[str] = None, endgame: bool = False):
    """Many independent runs in one kernel call.

    Returns ``(totals, snaps, cps)`` with totals columns (fires, clashes, zeta,
    max_x) and snapshots at the sorted checkpoint set, which always includes
    step ``n``. Bounds are checked for every run as in :func:`check_endgame`.
    """
    new_chain(n, alpha)
    cps = np.array(sorted(set(int(c) for c in checkpoints) | {n}), dtype=np.int64)
    totals, snaps = kernels.get(backend).run_chain_batch(n, alpha, np.asarray(seeds, dtype=np.uint64), cps)
    k = int(np.searchsorted(cps, n))
    for r in range(len(totals)):
        f, c, z, mx = (int(t) for t in totals[r])
        check_endgame(RunSummary(n, alpha, f, c, z, mx, tuple(int(a) for a in snaps[r, k])), endgame)
    return totals, snaps, cps


def terminal_law(n: int, alpha: int, *, loop_fix: bool = False) -> dict[tuple[int, int], float]:
    """Exact joint law of (fires, clashes) by forward propagation over states.

    With ``loop_fix`` the law is that of the chain amended at the isolated-loop
    rows: the idle-branch loop probability uses denominator ``3u+4v-1`` and every
    loop row also adds one fire (a detached loop must be relit). This is the law
    the continuous burn follows on small graphs; see the README.
    """
    new_chain(n, alpha)
    frontier: dict[tuple[int, ...], float] = {(n, alpha, 0, 0, 0): 1.0}
    out: dict[tuple[int, int], float] = defaultdict(float)
    while frontier:
        nxt: dict[tuple[int, ...], float] = defaultdict(float)
        for (u, v, x, m, f), p in frontier.items():
            if u + v + x == 0:
                out[(f, m)] += p
                continue
            f1 = f + (x == 0)
            for (du, dv, dx, dn), q in _law_rows(u, v, x, loop_fix):
                nxt[(u + du, v + dv, x + dx, m + dn, f1 + (loop_fix and dn == 1 and du == -1))] += p * q
        frontier = nxt
    return dict(out)


def _law_rows(u, v, x, loop_fix):
    rows, weights, total = chain_weights(u, v, x)
    if loop_fix and x == 0 and u > 0:
        s = 3 * u + 4 * v
        fixed = (3 * u * (s - 2), 3 * u * (s - 2) * (s - 2), 3 * u * (s - 2) * (s - 1),
                 4 * v * (s - 2) * (s - 1), 4 * v * (s - 2) * (s - 1))
        # over 2 s (s-1) (s-2): loop 3u/(2s(s-1)), absorb 3u(s-2)/(2s(s-1))
        weights, total = fixed, 2 * s * (s - 1) * (s - 2)
    return [(d, w / total) for d, w in zip(rows, weights) if w]
