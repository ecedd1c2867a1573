"""Limit objects: fluid curves and the reflected diffusion (X, L, N).

The diffusion solves

    dX = [(2a/3)(1-t)^{1/3} - 2X/(3(1-t))] dt + dB + dL,   X >= 0,

with N_t = int_0^t X_s / (3(1-s)) ds. Writing X = (1-t)^{2/3} Y turns it into
a reflected Brownian motion run at the clock f(t) = 3(1-t)^{-1/3} - 3, which is
what :func:`simulate_limit_path` samples exactly at grid points.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

CHUNK = 512  # paths simulated together; fixed so results do not depend on batching


# fluid limit ----------------------------------------------------------------


def _check_unit(t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("t must lie in [0, 1]")
    return arr


def fluid_curves(t):
    """``(u, v, x, m)`` at ``t``; scalars in, floats out, arrays in, arrays out."""
    arr = _check_unit(t)
    w = 1.0 - arr
    r = np.cbrt(w) ** 2  # (1-t)^{2/3}
    u, v, x, m = w, r * r, r - r * r, 0.25 - 0.5 * r + 0.25 * r * r
    if arr.ndim == 0:
        return float(u), float(v), float(x), float(m)
    return u, v, x, m


def _fluid_ext(t: float):
    # closed forms without the domain check, for finite differences at t = 0
    w = 1.0 - t
    r = np.cbrt(w) ** 2
    return w, r * r, r - r * r, 0.25 - 0.5 * r + 0.25 * r * r


def ode_residuals(t: float, h: float = 1e-5) -> tuple[float, float, float, float]:
    """Residuals of the u, v, x, m equations at ``t`` by centered differences."""
    if not 0 <= t < 1:
        raise ValueError("t must lie in [0, 1)")
    h = min(h, (1 - t) / 2)
    lo, hi, mid = _fluid_ext(t - h), _fluid_ext(t + h), _fluid_ext(t)
    du, dv, dx, dm = ((b - a) / (2 * h) for a, b in zip(lo, hi))
    u, v, x, _ = mid
    w = 1.0 - t
    return (
        float(du + 1.0),
        float(dv + 4 * v / (3 * u)),
        float(dx - (2.0 / 3.0 * np.cbrt(w) - 2 * x / (3 * w))),
        float(dm - x / (3 * w)),
    )


def clock(t):
    """Quadratic-variation clock f(t) = 3(1-t)^{-1/3} - 3."""
    return 3.0 / np.cbrt(1.0 - np.asarray(t, dtype=float)) - 3.0


def clock_inverse(f):
    return 1.0 - (3.0 / (np.asarray(f, dtype=float) + 3.0)) ** 3


def tail_bound(a: float, r: float) -> float:
    """Gaussian bound on sup_t P(X_t / sqrt(1-t) > r), valid for r >= a + 1."""
    if r < a + 1:
        raise ValueError(f"tail bound needs r >= a + 1, got r={r}, a={a}")
    return math.exp(-((r - a) ** 2) / 6.0)


def x0_variance(t: float) -> float:
    """Variance of the Gaussian whose modulus is X_t for a = 0."""
    return 3 * (1 - t) - 3 * (1 - t) ** (4 / 3)


def n1_mean_candidates() -> tuple[float, float]:
    """E[N_1] for a = 0 from 9 sqrt(2/pi) int sqrt(u)/(u+3)^3 du over (0, inf) and over (0, 1)."""
    c = 9 * math.sqrt(2 / math.pi)
    g = lambda u: math.sqrt(u) / (u + 3) ** 3  # noqa: E731
    return c * integrate.quad(g, 0, np.inf)[0], c * integrate.quad(g, 0, 1)[0]


# diffusion paths ------------------------------------------------------------


@dataclass
class SdePath:
    a: float
    grid: np.ndarray
    X: np.ndarray
    L: np.ndarray
    N: np.ndarray

    @property
    def L1(self) -> float:
        return float(self.L[-1])

    @property
    def N1(self) -> float:
        return float(self.N[-1])

    def check(self, band: Optional[float] = None) -> None:
        if np.any(self.X < 0):
            raise AssertionError("X went negative")
        if np.any(np.diff(self.L) < 0) or np.any(np.diff(self.N) < 0):
            raise AssertionError("L and N must be non-decreasing")
        if band is None:
            band = 2 * np.sqrt(np.diff(self.grid).max())
        grows = np.diff(self.L) > 0
        if np.any(grows & (self.X[1:] > band) & (self.X[:-1] > band)):
            raise AssertionError("L increased away from zero")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "X", "L", "N"])
            for row in zip(self.grid, self.X, self.L, self.N):
                w.writerow([repr(float(v)) for v in row])


@dataclass
class SdeSample:
    """Many paths reduced to marginals at ``times`` plus terminal functionals."""

    a: float
    times: np.ndarray
    X: np.ndarray  # (reps, len(times))
    L1: np.ndarray
    N1: np.ndarray
    X_end: np.ndarray


def limit_grid(eps: float = 1e-4, npts: int = 20000, times: Sequence[float] = ()) -> np.ndarray:
    """Grid uniform in clock time from 0 to 1 - eps, with ``times`` spliced in."""
    if eps <= 0 or eps >= 1:
        raise ValueError("eps must lie in (0, 1)")
    if npts < 2:
        raise ValueError("need at least two grid points")
    grid = clock_inverse(np.linspace(0.0, float(clock(1 - eps)), npts))
    grid[-1] = 1 - eps
    extra = np.asarray([t for t in times if 0 <= t <= 1 - eps], dtype=float)
    return np.unique(np.concatenate([grid, extra]))


def _explicit(a: float, grid: np.ndarray, rng: np.random.Generator, reps: int, keep=None, block: int = 1024):
    """X, L, N at grid columns ``keep`` (all when None), streamed in time blocks."""
    n = len(grid)
    cols = np.arange(n) if keep is None else np.asarray(keep, dtype=np.int64)
    f = clock(grid)
    w = 1.0 - grid
    s23 = np.cbrt(w) ** 2
    drift = a - a * s23  # deterministic part of Z in clock time
    out = np.zeros((3, reps, len(cols)))
    bm, z, k, lv, nv = (np.zeros(reps) for _ in range(5))
    g = np.zeros(reps)
    for lo in range(0, n - 1, block):
        hi = min(lo + block, n - 1)
        df = np.diff(f[lo:hi + 1])
        B = bm[:, None] + np.cumsum(rng.standard_normal((reps, hi - lo)) * np.sqrt(df), axis=1)
        Z = B + drift[lo + 1:hi + 1]
        z0 = np.concatenate([z[:, None], Z[:, :-1]], axis=1)
        # exact minimum of the Brownian bridge between consecutive grid points
        e = rng.random((reps, hi - lo))
        bmin = 0.5 * (z0 + Z - np.sqrt((Z - z0) ** 2 - 2.0 * df * np.log1p(-e)))
        K = np.maximum.accumulate(np.maximum(np.maximum(-bmin, 0.0), k[:, None]), axis=1)
        X = np.maximum(s23[lo + 1:hi + 1] * (Z + K), 0.0)  # clip is rounding only
        L = lv[:, None] + np.cumsum(s23[lo:hi] * np.diff(np.concatenate([k[:, None], K], axis=1), axis=1), axis=1)
        G = X / (3.0 * w[lo + 1:hi + 1])
        Gl = np.concatenate([g[:, None], G[:, :-1]], axis=1)
        N = nv[:, None] + np.cumsum(0.5 * (Gl + G) * np.diff(grid[lo:hi + 1]), axis=1)
        sel = np.nonzero((cols > lo) & (cols <= hi))[0]
        for q, arr in enumerate((X, L, N)):
            out[q][:, sel] = arr[:, cols[sel] - lo - 1]
        bm, z, k, lv, nv, g = B[:, -1], Z[:, -1], K[:, -1], L[:, -1], N[:, -1], G[:, -1]
    return out[0], out[1], out[2]


def simulate_limit_path(a: float, seed, eps: float = 1e-4, npts: int = 20000, times: Sequence[float] = ()) -> SdePath:
    """One path by the explicit time-changed construction."""
    if a < 0:
        raise ValueError("a must be nonnegative")
    grid = limit_grid(eps, npts, times)
    X, L, N = _explicit(float(a), grid, np.random.default_rng(seed), 1)
    return SdePath(float(a), grid, X[0], L[0], N[0])


def _chunks(reps: int):
    for start in range(0, reps, CHUNK):
        yield start // CHUNK, min(CHUNK, reps - start)


def _chunk_rng(seed, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))


def simulate_limit_batch(
    a: float, reps: int, seed, times: Sequence[float] = (0.5,), eps: float = 1e-4, npts: int = 20000
) -> SdeSample:
    """``reps`` explicit-construction paths, reduced to marginals and terminal values."""
    if a < 0:
        raise ValueError("a must be nonnegative")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    times = np.asarray(times, dtype=float)
    grid = limit_grid(eps, npts, times)
    idx = np.searchsorted(grid, times)
    keep = np.unique(np.concatenate([idx, [len(grid) - 1]]))
    pos = np.searchsorted(keep, idx)
    out_x, out_l, out_n, out_e = [], [], [], []
    for k, m in _chunks(reps):
        X, L, N = _explicit(float(a), grid, _chunk_rng(seed, k), m, keep)
        out_x.append(X[:, pos])
        out_l.append(L[:, -1])
        out_n.append(N[:, -1])
        out_e.append(X[:, -1])
    return SdeSample(float(a), times, np.concatenate(out_x), np.concatenate(out_l), np.concatenate(out_n), np.concatenate(out_e))


def simulate_limit_em(
    a: float, dt: float, seed, reps: int = 1, eps: float = 1e-4, times: Sequence[float] = (0.5,), full: bool = False
):
    """Projection Euler scheme, vectorised across ``reps`` paths.

    Returns an :class:`SdePath` when ``full`` is set (``reps`` must then be 1),
    otherwise an :class:`SdeSample` with marginals at ``times``.
    """
    if not 0 < dt <= 1e-2:
        raise ValueError(f"dt must lie in (0, 1e-2], got {dt}")
    if a < 0:
        raise ValueError("a must be nonnegative")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if full and reps != 1:
        raise ValueError("full paths are only kept for a single replicate")
    horizon = 1.0 - eps
    nsteps = int(math.ceil(horizon / dt - 1e-9))
    grid = np.minimum(np.arange(nsteps + 1) * dt, horizon)
    times = np.asarray(times, dtype=float)
    tidx = np.searchsorted(grid, times - 1e-12)
    xs, ls, ns, es = [], [], [], []
    for k, m in _chunks(reps):
        rng = _chunk_rng(seed, k)
        X = np.zeros(m)
        L = np.zeros(m)
        N = np.zeros(m)
        marg = np.zeros((m, len(times)))
        hist = [np.zeros((nsteps + 1, 3))] if full else None
        for j in range(nsteps):
            t, h = grid[j], grid[j + 1] - grid[j]
            for q in np.nonzero(tidx == j)[0]:
                marg[:, q] = X
            w = 1.0 - t
            g0 = X / (3 * w)
            prop = X + ((2 * a / 3) * np.cbrt(w) - 2 * X / (3 * w)) * h + math.sqrt(h) * rng.standard_normal(m)
            push = np.maximum(-prop, 0.0)
            X = prop + push
            L += push
            N += 0.5 * (g0 + X / (3 * (1.0 - grid[j + 1]))) * h
            if full:
                hist[0][j + 1] = (X[0], L[0], N[0])
        for q in np.nonzero(tidx == nsteps)[0]:
            marg[:, q] = X
        if full:
            hx = hist[0]
            return SdePath(float(a), grid, hx[:, 0], hx[:, 1], hx[:, 2])
        xs.append(marg)
        ls.append(L)
        ns.append(N)
        es.append(X)
    return SdeSample(float(a), times, np.concatenate(xs), np.concatenate(ls), np.concatenate(ns), np.concatenate(es))
