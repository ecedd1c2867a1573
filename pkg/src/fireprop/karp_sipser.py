"""Karp-Sipser greedy matching on G(N, M) with phase instrumentation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .rng import SplitMix64, derive_seed
from .stats import empirical_summary, slope_fit


@dataclass
class SimpleGraph:
    n: int
    edges: np.ndarray  # (M, 2), i < j

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(self.edges):
            lo, hi = self.edges.min(axis=1), self.edges.max(axis=1)
            if np.any(lo == hi):
                raise ValueError("self-loop")
            if lo.min() < 0 or hi.max() >= self.n:
                raise ValueError("vertex index out of range")
            if len(np.unique(lo * self.n + hi)) != len(lo):
                raise ValueError("multi-edge")
            self.edges = np.column_stack([lo, hi])

    @property
    def m(self) -> int:
        return len(self.edges)

    def incidence(self) -> list[list[int]]:
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for k, (a, b) in enumerate(self.edges.tolist()):
            inc[a].append(k)
            inc[b].append(k)
        return inc

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)


def sample_gnm(n: int, m: int, seed) -> SimpleGraph:
    """Uniform simple graph with exactly ``m`` edges on ``n`` vertices."""
    total = n * (n - 1) // 2
    if m > total or m < 0:
        raise ValueError(f"M={m} out of range for N={n} (max {total})")
    rng = np.random.default_rng(seed)
    if total <= 4 * m + 1000:
        i, j = np.triu_indices(n, 1)
        pick = np.sort(rng.choice(total, size=m, replace=False))
        return SimpleGraph(n, np.column_stack([i[pick], j[pick]]))
    # distinct uniform pairs in order of first appearance form a uniform m-subset
    seen = np.empty(0, dtype=np.int64)
    while True:
        need = m - len(np.unique(seen))
        a = rng.integers(0, n, size=int(need * 1.1) + 16)
        b = rng.integers(0, n, size=len(a))
        ok = a != b
        code = np.minimum(a, b)[ok] * n + np.maximum(a, b)[ok]
        seen = np.concatenate([seen, code])
        uniq, first = np.unique(seen, return_index=True)
        if len(uniq) >= m:
            chosen = seen[np.sort(first)[:m]]
            return SimpleGraph(n, np.column_stack([chosen // n, chosen % n]))


@dataclass
class KsResult:
    matching: list[tuple[int, int]]
    phase2_start_vertices: frozenset = field(default_factory=frozenset)
    a_n: int = 0
    unmatched_total: int = 0
    made_random_choice: bool = False

    @property
    def size(self) -> int:
        return len(self.matching)


class _Bag:
    """Set with O(1) insert, delete and uniform draw."""

    __slots__ = ("items", "pos")

    def __init__(self, items=()):
        self.items = list(items)
        self.pos = {x: i for i, x in enumerate(self.items)}

    def add(self, x):
        if x not in self.pos:
            self.pos[x] = len(self.items)
            self.items.append(x)

    def discard(self, x):
        i = self.pos.pop(x, None)
        if i is not None:
            last = self.items.pop()
            if i < len(self.items):
                self.items[i] = last
                self.pos[last] = i

    def draw(self, rng: SplitMix64):
        return self.items[rng.below(len(self.items))]

    def __len__(self):
        return len(self.items)


def karp_sipser_run(g: SimpleGraph, seed: int) -> KsResult:
    """Pendant vertices first (uniformly chosen), otherwise a uniform edge."""
    rng = SplitMix64(seed)
    edges = g.edges.tolist()
    inc = g.incidence()
    deg = [len(x) for x in inc]
    alive_v = [True] * g.n
    live_edges = _Bag(range(g.m))
    pendant = _Bag(v for v in range(g.n) if deg[v] == 1)
    matched = [False] * g.n
    matching: list[tuple[int, int]] = []
    start: frozenset = frozenset()
    random_choice = False

    def delete(x: int) -> None:
        alive_v[x] = False
        pendant.discard(x)
        for e in inc[x]:
            if e in live_edges.pos:
                live_edges.discard(e)
                a, b = edges[e]
                y = b if a == x else a
                deg[y] -= 1
                if deg[y] == 1:
                    pendant.add(y)
                elif deg[y] == 0:
                    pendant.discard(y)
        deg[x] = 0

    while len(live_edges):
        if len(pendant):
            v = pendant.draw(rng)
            e = next(e for e in inc[v] if e in live_edges.pos)
            a, b = edges[e]
            w = b if a == v else a
        else:
            if not random_choice:
                random_choice = True
                start = frozenset(x for x in range(g.n) if alive_v[x] and deg[x] > 0)
            a, b = edges[live_edges.draw(rng)]
            v, w = a, b
        matched[v] = matched[w] = True
        matching.append((min(v, w), max(v, w)))
        delete(v)
        delete(w)
    a_n = sum(1 for x in start if not matched[x])
    return KsResult(matching, start, a_n, g.n - 2 * len(matching), random_choice)


def max_matching_exact(g: SimpleGraph) -> int:
    """Maximum matching size by memoised branching over vertex subsets (N <= 24)."""
    if g.n > 24:
        raise ValueError(f"exact matching limited to N <= 24, got {g.n}")
    adj = [0] * g.n
    for a, b in g.edges.tolist():
        adj[a] |= 1 << b
        adj[b] |= 1 << a

    @lru_cache(maxsize=None)
    def best(mask: int) -> int:
        pick, pdeg = -1, 99
        rest = mask
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            dv = bin(adj[v] & mask).count("1")
            if dv == 0:
                return best(mask & ~(1 << v))
            if dv < pdeg:
                pick, pdeg = v, dv
        if pick < 0:
            return 0
        v = pick
        nb = adj[v] & mask
        if pdeg == 1:  # a pendant edge is always in some maximum matching
            return 1 + best(mask & ~(1 << v) & ~nb)
        out = best(mask & ~(1 << v))
        while nb:
            w = (nb & -nb).bit_length() - 1
            nb &= nb - 1
            out = max(out, 1 + best(mask & ~(1 << v) & ~(1 << w)))
            if out * 2 >= bin(mask).count("1") - 1:
                break
        return out

    return best((1 << g.n) - 1)


def random_forest(n: int, seed) -> SimpleGraph:
    """Random forest: each vertex k > 0 links to an earlier vertex w.p. 3/4."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    edges = []
    for k in range(1, n):
        if rng.random() < 0.75:
            edges.append((perm[k], perm[rng.integers(k)]))
    return SimpleGraph(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2))


CSV_COLUMNS = ("N", "c", "rep", "matching_size", "a_n", "made_random_choice")


def ks_replicate(c: float, n: int, rep: int, seed: int) -> tuple:
    s = derive_seed(seed, n, rep)
    g = sample_gnm(n, int(math.floor(c * n / 2)), s)
    r = karp_sipser_run(g, derive_seed(s, 1))
    return (n, c, rep, r.size, r.a_n, int(r.made_random_choice))


@dataclass
class ScalingResult:
    rows: list[tuple]
    table: list[tuple]  # (N, mean a_n, ci_lo, ci_hi)
    slope: float
    slope_se: float


def scaling_experiment(c: float, n_list, reps: int, seed: int, pool=None) -> ScalingResult:
    """Mean A_N with normal CIs per N and the log-log slope of the means."""
    if c <= 0:
        raise ValueError("c must be positive")
    jobs = [(c, n, r, seed) for n in n_list for r in range(reps)]
    rows = list(pool.starmap(ks_replicate, jobs)) if pool is not None else [ks_replicate(*j) for j in jobs]
    table = []
    for n in n_list:
        a = np.array([row[4] for row in rows if row[0] == n], dtype=float)
        mean = float(a.mean())
        try:
            _, _, ci = empirical_summary(a)
        except ValueError:
            ci = (mean, mean)
        table.append((n, mean, ci[0], ci[1]))
    pts = [(math.log(n), math.log(m)) for n, m, _, _ in table if m > 0]
    slope, se = slope_fit(pts) if len(pts) >= 2 else (float("nan"), float("nan"))
    return ScalingResult(rows, table, slope, se)
