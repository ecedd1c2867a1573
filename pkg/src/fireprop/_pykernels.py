"""Pure-Python implementations of the hot loops.

These mirror ``_ckernels.pyx`` statement for statement: same row order, same
integer weights, same SplitMix64 draws. Given a seed, both backends return
identical results; the compiled one is a few hundred times faster.
"""
from __future__ import annotations

import numpy as np

from .rng import SplitMix64

# Row tables: (du, dv, dx, dn). Weights are integers over a common total so
# that sampling is exact and platform independent.
IDLE_ROWS = ((-1, 0, 1, 1), (-1, 0, 1, 0), (-1, 0, 3, 0), (1, -1, 1, 0), (0, -1, 4, 0))
BURN_ROWS = (
    (-1, 0, -1, 1),
    (-1, 0, -1, 0),
    (-1, 0, 1, 0),
    (1, -1, -1, 0),
    (0, -1, 2, 0),
    (0, 0, -2, 1),
)


def chain_weights(u, v, x):
    """Integer weights for the six (x>0) or five (x=0) rows, plus their total."""
    if x == 0:
        s = 3 * u + 4 * v
        return IDLE_ROWS, (3 * u, 3 * u * (s - 3), 3 * u * (s - 2), 4 * v * (s - 2), 4 * v * (s - 2)), 2 * s * (s - 2)
    d1 = 3 * u + 4 * v + x - 1
    if u == 0:
        return BURN_ROWS, (0, 0, 0, 4 * v, 4 * v, 2 * (x - 1)), 2 * d1
    d3 = d1 - 2
    w = (3 * u, 3 * u * (d1 - 3), 3 * u * d3, 4 * v * d3, 4 * v * d3, 2 * (x - 1) * d3)
    return BURN_ROWS, w, 2 * d1 * d3


def _pick(weights, r):
    for k, w in enumerate(weights):
        if r < w:
            return k
        r -= w
    raise AssertionError("draw beyond total weight")


def run_chain(n, alpha, seed, checkpoints):
    """Run the chain from (n, alpha, 0, 0) to absorption.

    ``checkpoints`` is a sorted int64 array of step indices; row ``j`` of the
    returned snapshot array is (u, v, x, nclash, lt) after ``checkpoints[j]``
    steps (the absorbed state if the chain stopped earlier).
    """
    rng = SplitMix64(seed)
    u, v, x, m, lt, i = n, alpha, 0, 0, 0, 0
    max_x = 0
    cps = np.asarray(checkpoints, dtype=np.int64)
    snaps = np.zeros((len(cps), 5), dtype=np.int64)
    j = 0
    while True:
        while j < len(cps) and cps[j] == i:
            snaps[j] = (u, v, x, m, lt)
            j += 1
        if u + v + x == 0:
            break
        rows, w, total = chain_weights(u, v, x)
        if x == 0:
            lt += 2
        du, dv, dx, dn = rows[_pick(w, rng.below(total))]
        u += du
        v += dv
        x += dx
        m += dn
        i += 1
        if x > max_x:
            max_x = x
    while j < len(cps):
        snaps[j] = (u, v, x, m, lt)
        j += 1
    return lt // 2, m, i, max_x, snaps


# Coupled rows: (dx1, dx2, dy, du, dv, dn1, dn2), y >= 3 version. For y == 2
# every dy is replaced by +1; rows differing only in dy are adjacent, so the
# same draw lands on an equivalent outcome.
STACK1_ROWS = (
    (-2, 0, -1, 0, 0, 1, 0),
    (-2, 0, 1, 0, 0, 1, 0),
    (-1, -1, -1, 0, 0, 0, 1),
    (-1, -1, 1, 0, 0, 0, 1),
    (-1, 0, -1, -1, 0, 1, 0),
    (-1, 0, -1, 1, -1, 0, 0),
    (-1, 0, -1, -1, 0, 0, 0),
    (1, 0, 1, -1, 0, 0, 0),
    (1, 1, 1, 0, -1, 0, 0),
)
STACK2_ROWS = (
    (0, -2, -1, 0, 0, 0, 1),
    (0, -2, 1, 0, 0, 0, 1),
    (0, -1, -1, -1, 0, 1, 0),
    (0, -1, -1, 1, -1, 0, 0),
    (0, -1, -1, -1, 0, 0, 0),
    (2, -1, 1, -1, 0, 0, 0),
    (2, 0, 1, 0, -1, 0, 0),
)
EMPTY_ROWS = (
    (1, 0, -1, -1, 0, 1, 0),
    (1, 0, -1, -1, 0, 0, 0),
    (1, 0, -1, 1, -1, 0, 0),
    (3, 0, 1, -1, 0, 0, 0),
    (3, 1, 1, 0, -1, 0, 0),
)


def coupled_weights(x1, x2, u, v):
    x = x1 + x2
    if x == 0:
        s = 3 * u + 4 * v
        return EMPTY_ROWS, (3 * u, 3 * u * (s - 3), 4 * v * (s - 2), 3 * u * (s - 2), 4 * v * (s - 2)), 2 * s * (s - 2)
    d1 = 3 * u + 4 * v + x - 1
    if u == 0:
        d3, a3, b3, total = 1, 0, 0, 2 * d1
    else:
        d3 = d1 - 2
        a3, b3, total = 3 * u, 3 * u * (d1 - 3), 2 * d1 * d3
    if x1 > 0:
        c = (x1 - 1) * d3
        e = x2 * d3
        return STACK1_ROWS, (c, c, e, e, a3, 4 * v * d3, b3, 3 * u * d3, 4 * v * d3), total
    c = (x2 - 1) * d3
    return STACK2_ROWS, (c, c, a3, 4 * v * d3, b3, 3 * u * d3, 4 * v * d3), total


def run_coupled(n, alpha, seed):
    """Run the stacked chain; returns a tuple of run totals and path diagnostics.

    Layout: (fires, clashes, zeta, max_x1, max_x2, max_y, n1, n2,
    n_dom_violations, n_stack_violations, y_up, y_down).
    The violation counters tally steps where x1 > y, or x2 / n2 exceed
    alpha - v; they are zero on every correct path.
    """
    rng = SplitMix64(seed)
    x1 = x2 = 0
    y = 2
    u, v = n, alpha
    n1 = n2 = lt = i = 0
    max_x1 = max_x2 = 0
    max_y = 2
    dom_bad = stack_bad = 0
    y_up = y_down = 0
    while u + v + x1 + x2 > 0:
        rows, w, total = coupled_weights(x1, x2, u, v)
        if x1 + x2 == 0:
            lt += 2
        dx1, dx2, dy, du, dv, dn1, dn2 = rows[_pick(w, rng.below(total))]
        if y == 2:
            dy = 1
        elif dy > 0:
            y_up += 1
        else:
            y_down += 1
        x1 += dx1
        x2 += dx2
        y += dy
        u += du
        v += dv
        n1 += dn1
        n2 += dn2
        i += 1
        if x1 > max_x1:
            max_x1 = x1
        if x2 > max_x2:
            max_x2 = x2
        if y > max_y:
            max_y = y
        if x1 > y:
            dom_bad += 1
        if x2 > alpha - v or n2 > alpha - v:
            stack_bad += 1
    return (lt // 2, n1 + n2, i, max_x1, max_x2, max_y, n1, n2, dom_bad, stack_bad, y_up, y_down)


def drift_walk(b, d_num, d_den, seed, max_steps):
    """Walk with steps -1 (1/2), +1 (1/2 - d), +2 (d) started at 1, reflected 0 -> 1.

    ``d = d_num / d_den`` exactly (integer weights keep both backends in step).
    Runs until the walk first reaches ``{b, b+1}`` or ``max_steps`` steps pass.
    Returns (zero_visits, steps, max_position).
    """
    rng = SplitMix64(seed)
    total = 2 * d_den
    down = d_den
    up1 = d_den - 2 * d_num
    a = 1
    visits = 0
    steps = 0
    top = 1
    while a < b and steps < max_steps:
        if a == 0:
            visits += 1
            a = 1
        else:
            r = rng.below(total)
            if r < down:
                a -= 1
            elif r < down + up1:
                a += 1
            else:
                a += 2
        steps += 1
        if a > top:
            top = a
    return visits, steps, top


def run_chain_batch(n, alpha, seeds, checkpoints):
    """Loop ``run_chain`` over an array of seeds; results stacked by seed."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    cps = np.asarray(checkpoints, dtype=np.int64)
    totals = np.zeros((len(seeds), 4), dtype=np.int64)
    snaps = np.zeros((len(seeds), len(cps), 5), dtype=np.int64)
    for r, seed in enumerate(seeds):
        f, c, z, mx, sn = run_chain(n, alpha, int(seed), cps)
        totals[r] = (f, c, z, mx)
        snaps[r] = sn
    return totals, snaps
