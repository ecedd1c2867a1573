"""Ruin probabilities for the drifted walk with steps -1, +1, +2.

The walk moves -1 w.p. 1/2, +1 w.p. 1/2 - d and +2 w.p. d. ``h_k`` is the
probability of reaching 0 before {b, b+1} from k, so h_0 = 1, h_b = h_{b+1} = 0
and h_k = h_{k-1}/2 + (1/2 - d) h_{k+1} + d h_{k+2} in between. The general
solution is phi + beta lam_-^k + gamma lam_+^k with
lam_pm = (-1 pm sqrt(1+8d)) / (4d).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from . import kernels
from .rng import derive_seed

BANDED_MAX_B = 20000


@dataclass(frozen=True)
class DriftWalkParams:
    b: int
    d: float

    def __post_init__(self):
        if not 0 < self.d < 0.5:
            raise ValueError(f"d must lie in (0, 1/2), got {self.d}")
        if self.b < 2:
            raise ValueError(f"b must be >= 2, got {self.b}")

    def roots(self) -> tuple[float, float]:
        r = math.sqrt(1 + 8 * self.d)
        return (-1 - r) / (4 * self.d), 2 / (1 + r)  # lam_-, lam_+ (cancellation-free)

    def one_minus_lam_plus(self) -> float:
        return 8 * self.d / (1 + math.sqrt(1 + 8 * self.d)) ** 2


def hitting_profile(p: DriftWalkParams) -> np.ndarray:
    """``h_0 .. h_{b+1}`` by banded elimination of the interior equations."""
    b, d = p.b, p.d
    m = b - 1
    ab = np.zeros((4, m))  # upper bandwidth 2, lower 1
    ab[2, :] = 1.0
    ab[1, 1:] = -(0.5 - d)
    ab[0, 2:] = -d
    ab[3, :-1] = -0.5
    rhs = np.zeros(m)
    rhs[0] = 0.5
    h = np.zeros(b + 2)
    h[0] = 1.0
    h[1:b] = solve_banded((1, 2), ab, rhs)
    return h


def recurrence_residuals(p: DriftWalkParams, h: np.ndarray) -> np.ndarray:
    d = p.d
    k = np.arange(1, p.b)
    return h[k] - (0.5 * h[k - 1] + (0.5 - d) * h[k + 1] + d * h[k + 2])


def one_minus_h1(p: DriftWalkParams) -> float:
    """1 - h_1 from the root representation, stable for any b.

    Uses the basis 1, lam_-^{k-b}, lam_+^k - lam_+^b, which keeps the system
    well conditioned as d -> 0 and does not overflow for large b.
    """
    b = p.b
    lm, _ = p.roots()
    q = p.one_minus_lam_plus()
    pb = math.exp(b * math.log1p(-q))  # lam_+^b
    one_m_pb = -math.expm1(b * math.log1p(-q))
    lm_neg_b = (-1) ** b * math.exp(-b * math.log(-lm))  # lam_-^{-b}
    # c0 = -beta', beta' = gamma lam_+^b (1 - lam_+) / (lam_- - 1)
    ratio = pb * q / (lm - 1)
    gamma = 1.0 / (one_m_pb + (lm_neg_b - 1) * ratio)
    beta = gamma * ratio
    return beta * lm_neg_b * (1 - lm) + gamma * q


def hitting_prob_solve(p: DriftWalkParams, method: str = "auto") -> float:
    """h_1, the ruin probability from 1 (ground truth)."""
    if method == "auto":
        method = "banded" if p.b <= BANDED_MAX_B else "roots"
    if method == "banded":
        return float(hitting_profile(p)[1])
    if method == "roots":
        return 1.0 - one_minus_h1(p)
    raise ValueError(f"unknown method {method!r}")


def _closed(p: DriftWalkParams, corrected: bool) -> float:
    b = p.b
    lm, lp = p.roots()
    # divide every term by lam_-^{b+1} so nothing overflows
    M1, M = 1.0, 1.0 / lm
    P = (-1) ** (b + 1) * math.exp(b * math.log(lp) - (b + 1) * math.log(-lm))
    P1 = P * lp
    q = (P1 - P) if corrected else (P - P1)
    den = M1 * lp**b - M * lp ** (b + 1) - M1 + M + q
    phi = (M1 * lp**b - M * lp ** (b + 1)) / den
    beta = q / den
    gamma = (M - M1) / den
    return phi + beta * lm + gamma * lp


def hitting_prob_printed_closed(p: DriftWalkParams) -> float:
    """The printed closed-form constants, evaluated as written."""
    return _closed(p, corrected=False)


hitting_prob_paper_closed = hitting_prob_printed_closed


def hitting_prob_corrected_closed(p: DriftWalkParams) -> float:
    """Closed form with lam_+^b - lam_+^{b+1} replaced by lam_+^{b+1} - lam_+^b.

    That one sign, in beta's numerator and in the shared denominator, is the
    only change needed for the constants to meet all three boundary values.
    """
    return _closed(p, corrected=True)


def hitting_prob_printed_h1(p: DriftWalkParams) -> float:
    """The printed simplified expression for h_1, in raw powers (small b only)."""
    b, d = p.b, p.d
    r = math.sqrt(1 + 8 * d)
    A, B = (-1 - r) ** b, (-1 + r) ** b
    num = 4 * d * A + 4 * d * B
    den = (-2) ** (b + 1) * r + 4 * d * A + 4 * d * B - (-1 - r) ** (b + 1) - (-1 + r) ** (b + 1)
    return 1 - num / den


def asymptotic_path(M: float) -> DriftWalkParams:
    """Parameters (b, d) met when a walk is coupled to the chain at scale M.

    s = M^{3/4}, b = floor(3s/8) - 3, d = 4s/(3M); then 1 - h_1 ~ 2d.
    """
    s = M**0.75
    return DriftWalkParams(int(math.floor(3 * s / 8)) - 3, 4 * s / (3 * M))


def _rational(d: float) -> tuple[int, int]:
    fr = (Fraction(repr(d)) if isinstance(d, float) else Fraction(d)).limit_denominator(1 << 40)
    return fr.numerator, fr.denominator


def simulate_drift_walk(p: DriftWalkParams, seed: int, max_steps: int = 10**9, backend: Optional[str] = None):
    """One walk from 1 until {b, b+1}; ``(visits_to_zero, steps, max_height)``.

    From 0 the walk is sent back to 1 and the visit is counted, so
    ``visits > 0`` is the event of ruin before the barrier.
    """
    num, den = _rational(p.d)
    v, s, top = kernels.get(backend).drift_walk(p.b, num, den, seed, max_steps)
    return int(v), int(s), int(top)


def drift_walk_batch(p: DriftWalkParams, reps: int, seed: int, backend: Optional[str] = None) -> np.ndarray:
    """Zero-visit counts of ``reps`` independent walks."""
    num, den = _rational(p.d)
    walk = kernels.get(backend).drift_walk
    out = np.empty(reps, dtype=np.int64)
    for i in range(reps):
        v, _, top = walk(p.b, num, den, derive_seed(seed, i), 10**12)
        if top > p.b + 1:
            raise AssertionError("walk overshot the barrier pair")
        out[i] = v
    return out
