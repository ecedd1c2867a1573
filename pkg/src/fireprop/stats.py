"""Small statistics harness: KS, pooled chi-square, summaries, slope fits."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import stats as _st

# asymptotic two-sample KS critical constants c(alpha)
KS_CRITICAL = {0.10: 1.224, 0.05: 1.358, 0.01: 1.628, 0.001: 1.949}


@dataclass
class TestReport:
    name: str
    statistic: float
    threshold: float
    passed: bool
    sizes: tuple
    p_value: Optional[float] = None
    dof: Optional[int] = None

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f" p={self.p_value:.4g}" if self.p_value is not None else ""
        return f"{tag} {self.name}: stat={self.statistic:.5g} thr={self.threshold:.5g}{extra} n={self.sizes}"

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def ks_statistic(xs, ys) -> float:
    """Two-sample Kolmogorov-Smirnov distance sup |F_x - F_y| (ties handled)."""
    x = np.sort(np.asarray(xs, dtype=float))
    y = np.sort(np.asarray(ys, dtype=float))
    if x.size == 0 or y.size == 0:
        raise ValueError("both samples must be nonempty")
    grid = np.concatenate([x, y])
    fx = np.searchsorted(x, grid, side="right") / x.size
    fy = np.searchsorted(y, grid, side="right") / y.size
    return float(np.max(np.abs(fx - fy)))


def ks_two_sample(xs, ys, level: float = 0.01, name: str = "ks", threshold: Optional[float] = None) -> TestReport:
    """KS test with the asymptotic threshold c(level) * sqrt((m+n)/(mn)).

    An explicit ``threshold`` overrides the level-based one (some checks fix
    an absolute distance instead).
    """
    d = ks_statistic(xs, ys)
    m, n = len(xs), len(ys)
    en = math.sqrt(m * n / (m + n))
    thr = KS_CRITICAL[level] / en if threshold is None else threshold
    p = float(_st.kstwobign.sf(d * en))
    return TestReport(name, d, thr, d <= thr, (m, n), p_value=p)


def ks_one_sample(xs, cdf, level: float = 0.01, name: str = "ks1") -> TestReport:
    x = np.sort(np.asarray(xs, dtype=float))
    if x.size == 0:
        raise ValueError("sample must be nonempty")
    f = cdf(x)
    k = np.arange(1, x.size + 1)
    d = float(max(np.max(k / x.size - f), np.max(f - (k - 1) / x.size)))
    en = math.sqrt(x.size)
    thr = KS_CRITICAL[level] / en
    return TestReport(name, d, thr, d <= thr, (x.size,), p_value=float(_st.kstwobign.sf(d * en)))


def chi_square_joint(
    observed: Mapping,
    expected_probs: Mapping,
    level: float = 0.01,
    min_expected: float = 5.0,
    name: str = "chi2",
) -> TestReport:
    """Goodness of fit of counts against a discrete law, pooling sparse cells.

    Cells are visited in decreasing expected probability; cells with expected
    count below ``min_expected`` are lumped together (together with any
    observed outcome outside the law's support).
    """
    total = sum(observed.values())
    if total <= 0:
        raise ValueError("no observations")
    psum = sum(expected_probs.values())
    if abs(psum - 1.0) > 1e-9:
        raise ValueError(f"expected probabilities sum to {psum}")
    big, pool_o, pool_e = [], 0.0, 0.0
    for k, p in sorted(expected_probs.items(), key=lambda kv: -kv[1]):
        e = p * total
        o = observed.get(k, 0)
        if e >= min_expected:
            big.append((o, e))
        else:
            pool_o += o
            pool_e += e
    pool_o += sum(v for k, v in observed.items() if k not in expected_probs)
    if pool_e >= min_expected or (pool_o > 0 and not big):
        big.append((pool_o, pool_e))
    elif big:
        # fold a thin pool into the smallest retained cell
        o, e = big[-1]
        big[-1] = (o + pool_o, e + pool_e)
    if pool_o > 0 and pool_e == 0:
        return TestReport(name, math.inf, 0.0, False, (total,), p_value=0.0, dof=len(big) - 1)
    stat = float(sum((o - e) ** 2 / e for o, e in big))
    dof = len(big) - 1
    if dof < 1:
        return TestReport(name, stat, math.inf, True, (total,), p_value=1.0, dof=0)
    thr = float(_st.chi2.ppf(1 - level, dof))
    return TestReport(name, stat, thr, stat <= thr, (total,), p_value=float(_st.chi2.sf(stat, dof)), dof=dof)


def chi_square_two_sample(a: Mapping, b: Mapping, level: float = 0.01, min_expected: float = 5.0, name: str = "chi2-2s") -> TestReport:
    """Homogeneity test between two count tables (2 x K contingency), pooling sparse cells."""
    keys = sorted(set(a) | set(b), key=lambda k: -(a.get(k, 0) + b.get(k, 0)))
    na, nb = sum(a.values()), sum(b.values())
    cols, pa, pb = [], 0, 0
    for k in keys:
        ca, cb = a.get(k, 0), b.get(k, 0)
        tot = ca + cb
        if min(tot * na, tot * nb) / (na + nb) >= min_expected:
            cols.append((ca, cb))
        else:
            pa, pb = pa + ca, pb + cb
    if pa + pb:
        cols.append((pa, pb))
    table = np.array(cols, dtype=float).T
    if table.shape[1] < 2:
        return TestReport(name, 0.0, math.inf, True, (na, nb), p_value=1.0, dof=0)
    stat, p, dof, _ = _st.chi2_contingency(table, correction=False)
    thr = float(_st.chi2.ppf(1 - level, dof))
    return TestReport(name, float(stat), thr, stat <= thr, (na, nb), p_value=float(p), dof=int(dof))


def empirical_summary(xs, level: float = 0.95) -> tuple[float, float, tuple[float, float]]:
    """Sample mean, unbiased variance and a normal-approximation CI for the mean."""
    x = np.asarray(xs, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two observations")
    mean, var = float(x.mean()), float(x.var(ddof=1))
    if var == 0:
        raise ValueError("zero variance: confidence interval undefined")
    z = float(_st.norm.ppf(0.5 + level / 2))
    half = z * math.sqrt(var / x.size)
    return mean, var, (mean - half, mean + half)


def slope_fit(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares slope and its standard error."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        raise ValueError("need at least two points")
    x, y = pts[:, 0], pts[:, 1]
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise ValueError("degenerate x values")
    slope = float(xc @ (y - y.mean())) / sxx
    if len(pts) == 2:
        return slope, 0.0
    resid = y - y.mean() - slope * xc
    se = math.sqrt(float(resid @ resid) / (len(pts) - 2) / sxx)
    return slope, se
