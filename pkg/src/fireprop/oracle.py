"""Continuous-time burning on an explicit configuration-model multigraph.

This is the ground truth the discrete chain is checked against: real edge
lengths, fronts moving at unit speed, an event queue, and vertex coin flips.
"""
from __future__ import annotations

import heapq
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class Multigraph:
    """Half-edges ``0..H-1`` grouped by vertex; ``pairing`` is an involution."""

    degrees: np.ndarray
    pairing: np.ndarray
    lengths: Optional[np.ndarray] = None  # one per edge, edges ordered by smaller half-edge

    def __post_init__(self):
        self.degrees = np.asarray(self.degrees, dtype=np.int64)
        self.pairing = np.asarray(self.pairing, dtype=np.int64)
        self.owner = np.repeat(np.arange(len(self.degrees)), self.degrees)
        self.validate()

    @property
    def n_half_edges(self) -> int:
        return int(self.degrees.sum())

    @property
    def edges(self) -> np.ndarray:
        """``(E, 2)`` array of half-edge pairs ``(h, pairing[h])`` with ``h < pairing[h]``."""
        h = np.arange(self.n_half_edges)
        lo = h[h < self.pairing]
        return np.column_stack([lo, self.pairing[lo]])

    @property
    def n_edges(self) -> int:
        return self.n_half_edges // 2

    def validate(self) -> None:
        h = np.arange(self.n_half_edges)
        if len(self.pairing) != len(h):
            raise ValueError("pairing length does not match the degree sum")
        if np.any(self.pairing == h) or np.any(self.pairing[self.pairing] != h):
            raise ValueError("pairing must be a fixed-point-free involution")
        if self.lengths is not None:
            self.lengths = np.asarray(self.lengths, dtype=float)
            if len(self.lengths) != self.n_edges:
                raise ValueError("need exactly one length per edge")
            if not np.all(self.lengths > 0):
                raise ValueError("edge lengths must be strictly positive")

    def edge_vertices(self) -> list[tuple[int, int]]:
        return [(int(self.owner[a]), int(self.owner[b])) for a, b in self.edges]

    # line format -------------------------------------------------------

    def dumps(self) -> str:
        out = io.StringIO()
        out.write("fireprop-multigraph 1\n")
        out.write(f"degrees {' '.join(str(int(d)) for d in self.degrees)}\n")
        out.write(f"edges {self.n_edges}\n")
        for k, (a, b) in enumerate(self.edges):
            ln = "-" if self.lengths is None else repr(float(self.lengths[k]))
            out.write(f"{a} {b} {ln}\n")
        return out.getvalue()

    @classmethod
    def loads(cls, text: str) -> "Multigraph":
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines or lines[0] != "fireprop-multigraph 1":
            raise ValueError("missing 'fireprop-multigraph 1' header")
        key, *degs = lines[1].split()
        if key != "degrees":
            raise ValueError("second line must list degrees")
        degrees = np.array([int(d) for d in degs], dtype=np.int64)
        key, count = lines[2].split()
        if key != "edges":
            raise ValueError("third line must give the edge count")
        rows = [ln.split() for ln in lines[3:]]
        if len(rows) != int(count):
            raise ValueError(f"expected {count} edge lines, found {len(rows)}")
        pairing = np.full(int(degrees.sum()), -1, dtype=np.int64)
        lengths = []
        for a, b, ln in rows:
            a, b = int(a), int(b)
            if pairing[a] != -1 or pairing[b] != -1:
                raise ValueError(f"half-edge reused in edge {a} {b}")
            pairing[a], pairing[b] = b, a
            lengths.append(None if ln == "-" else float(ln))
        if any(ln is None for ln in lengths):
            if not all(ln is None for ln in lengths):
                raise ValueError("either all or no edges carry lengths")
            g = cls(degrees, pairing)
        else:
            # lengths were written in edge order (ascending smaller half-edge)
            order = np.argsort([min(int(a), int(b)) for a, b, _ in rows])
            g = cls(degrees, pairing, np.asarray(lengths)[order])
        return g


def sample_configuration(n: int, alpha: int, seed) -> Multigraph:
    """Uniform pairing of the half-edges of ``n`` degree-3 and ``alpha`` degree-4 vertices."""
    degrees = np.array([3] * n + [4] * alpha, dtype=np.int64)
    total = int(degrees.sum())
    if total % 2:
        raise ValueError("3n + 4alpha must be even")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(total)
    pairing = np.empty(total, dtype=np.int64)
    pairing[perm[0::2]] = perm[1::2]
    pairing[perm[1::2]] = perm[0::2]
    return Multigraph(degrees, pairing)


def assign_lengths(g: Multigraph, seed) -> Multigraph:
    rng = np.random.default_rng(seed)
    lengths = rng.exponential(1.0, size=g.n_edges)
    # exponential() can return exactly 0.0 with probability ~2^-53
    while np.any(lengths <= 0):
        bad = lengths <= 0
        lengths[bad] = rng.exponential(1.0, size=int(bad.sum()))
    return Multigraph(g.degrees, g.pairing, lengths)


@dataclass
class BurnOutcome:
    fires: int
    clashes: int
    total_burned: float
    total_length: float
    event_log: Optional[list] = field(default=None, repr=False)


_UNBURNT, _BURNING, _DONE = 0, 1, 2


def burn(g: Multigraph, seed, *, log: bool = False) -> BurnOutcome:
    """Burn ``g`` to completion and count fires and clashes.

    Fronts live on (sub)edges and always move away from the end they were lit
    at. A lone front reaches the far half-edge after the edge's length; two
    fronts on one edge meet in the middle of the gap (a clash). Ignition splits
    an unburnt edge at a uniform point into two sub-edges joined by an
    already-burnt virtual node. With ``log`` set, every event is recorded as
    ``(time, kind, edge, front_seq, active_front_seqs)``.
    """
    if g.lengths is None:
        raise ValueError("burn needs edge lengths; call assign_lengths first")
    rng = np.random.default_rng(seed)
    H = g.n_half_edges
    owner = [int(o) for o in g.owner] + []
    vertex_hes: list[list[int]] = [[] for _ in range(len(g.degrees))]
    for h, w in enumerate(owner):
        vertex_hes[w].append(h)
    live = [int(d) for d in g.degrees]
    if min(live, default=2) < 2:
        raise ValueError("burn requires minimum degree 2")
    consumed = [False] * H
    he_edge = [0] * H
    he_end = [0] * H
    ends: list[list[int]] = []
    length: list[float] = []
    state: list[int] = []
    front_t: list[list[Optional[float]]] = []
    front_seq: list[list[int]] = []
    version: list[int] = []
    for k, (a, b) in enumerate(g.edges):
        a, b = int(a), int(b)
        ends.append([a, b])
        length.append(float(g.lengths[k]))
        state.append(_UNBURNT)
        front_t.append([None, None])
        front_seq.append([-1, -1])
        version.append(0)
        he_edge[a], he_end[a] = k, 0
        he_edge[b], he_end[b] = k, 1

    heap: list = []
    counter = [0]
    active: dict[int, int] = {}  # front seq -> edge, for the log only
    events = [] if log else None

    def launch(h: int, t: float) -> None:
        consumed[h] = True
        e, end = he_edge[h], he_end[h]
        front_t[e][end] = t
        front_seq[e][end] = counter[0]
        if log:
            active[counter[0]] = e
        counter[0] += 1
        state[e] = _BURNING
        other = front_t[e][1 - end]
        te = (length[e] + t + other) / 2.0 if other is not None else t + length[e]
        version[e] += 1
        heapq.heappush(heap, (te, front_seq[e][end], e, version[e]))

    def arrive(h: int, t: float) -> None:
        if consumed[h]:
            raise AssertionError(f"front arrived at consumed half-edge {h}")
        w = owner[h]
        degree = live[w]
        consumed[h] = True
        live[w] -= 1
        if degree == 2 or rng.random() < 0.5:
            for h2 in vertex_hes[w]:
                if not consumed[h2]:
                    launch(h2, t)
            live[w] = 0

    fires = clashes = 0
    burned = 0.0
    t = 0.0
    while True:
        if not heap:
            cand = [e for e in range(len(state)) if state[e] == _UNBURNT]
            if not cand:
                break
            lens = np.array([length[e] for e in cand])
            cum = np.cumsum(lens)
            r = rng.random() * cum[-1]
            k = min(int(np.searchsorted(cum, r, side="right")), len(cand) - 1)
            e = cand[k]
            offset = r - (cum[k] - lens[k])
            offset = min(max(offset, 0.0), length[e])
            fires += 1
            # split e at offset: sub-edges (h0, a) and (b, h1), a and b virtual
            h0, h1 = ends[e]
            a, b = len(consumed), len(consumed) + 1
            consumed.extend([False, False])
            owner.extend([-1, -1])
            he_edge.extend([0, 0])
            he_end.extend([0, 0])
            state[e] = _DONE
            for (p, q), ln in (((h0, a), offset), ((b, h1), length[e] - offset)):
                k2 = len(ends)
                ends.append([p, q])
                length.append(ln)
                state.append(_UNBURNT)
                front_t.append([None, None])
                front_seq.append([-1, -1])
                version.append(0)
                he_edge[p], he_end[p] = k2, 0
                he_edge[q], he_end[q] = k2, 1
            if log:
                events.append((t, "ignite", e, -1, sorted(active)))
            launch(a, t)
            launch(b, t)
            continue
        te, seq, e, ver = heapq.heappop(heap)
        if ver != version[e] or state[e] != _BURNING:
            continue
        t = te
        state[e] = _DONE
        burned += length[e]
        if log:
            events.append((t, "meet" if None not in front_t[e] else "arrive", e, seq, sorted(active)))
            for end in (0, 1):
                active.pop(front_seq[e][end], None)
        if front_t[e][0] is not None and front_t[e][1] is not None:
            clashes += 1
        else:
            end = 0 if front_t[e][0] is not None else 1
            arrive(ends[e][1 - end], t)
    return BurnOutcome(fires, clashes, burned, float(np.sum(g.lengths)), events)


def burn_random(n: int, alpha: int, seed) -> BurnOutcome:
    """Sample a multigraph with exponential lengths and burn it (one replicate)."""
    ss = np.random.SeedSequence(seed)
    s_graph, s_len, s_burn = ss.spawn(3)
    g = assign_lengths(sample_configuration(n, alpha, s_graph), s_len)
    return burn(g, s_burn)


def dirichlet_split(weights, seed) -> np.ndarray:
    """Split a size-biased coordinate at an independent uniform point."""
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        raise ValueError("empty weight vector")
    rng = np.random.default_rng(seed)
    i = min(int(np.searchsorted(np.cumsum(w), rng.random() * w.sum(), side="right")), w.size - 1)
    uu = rng.random()
    return np.concatenate([w[:i], [uu * w[i], (1.0 - uu) * w[i]], w[i + 1:]])


def dirichlet_merge(weights, seed) -> np.ndarray:
    """Merge a uniformly chosen pair of neighbouring coordinates."""
    w = np.asarray(weights, dtype=float)
    if w.size < 2:
        raise ValueError("need at least two coordinates to merge")
    j = int(np.random.default_rng(seed).integers(w.size - 1))
    return np.concatenate([w[:j], [w[j] + w[j + 1]], w[j + 2:]])
