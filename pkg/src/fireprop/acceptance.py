"""Acceptance criteria 1-14 as callable checks.

Each ``criterion_k`` returns a :class:`CriterionResult`. Heavy criteria take
their replicate counts as keyword arguments so smoke runs can shrink them; the
defaults are the full-size settings.
"""
from __future__ import annotations

import math
import os
import tempfile
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import stats as _st

from ._pykernels import chain_weights, coupled_weights
from .chain import (ChainState, enumerated_increments, expected_increments, mean_field_path, run_batch,
                    terminal_law, transition_distribution_printed)
from .coupling import run_coupled
from .experiments import ExperimentConfig, run_experiment
from .hitting import (DriftWalkParams, asymptotic_path, drift_walk_batch, hitting_prob_printed_closed,
                      hitting_prob_solve, hitting_profile, one_minus_h1, recurrence_residuals)
from .karp_sipser import (karp_sipser_run, max_matching_exact, random_forest, sample_gnm, scaling_experiment)
from .limit import (fluid_curves, n1_mean_candidates, simulate_limit_batch, simulate_limit_em, tail_bound,
                    x0_variance)
from .oracle import burn_random
from .rng import derive_seed
from .stats import chi_square_joint, chi_square_two_sample, ks_one_sample, ks_two_sample

MASTER = 20240229


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        bits = ", ".join(f"{k}={_short(v)}" for k, v in self.detail.items())
        return f"[{tag}] criterion {self.number:2d} {self.name} ({self.seconds:.1f}s): {bits}"

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": bool(self.passed),
                "seconds": round(self.seconds, 3), "detail": {k: _jsonable(v) for k, v in self.detail.items()}}


def _short(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return v


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def _timed(number: int, name: str):
    def wrap(fn):
        def run(*args, **kw):
            t0 = time.perf_counter()
            passed, detail = fn(*args, **kw)
            return CriterionResult(number, name, bool(passed), detail, time.perf_counter() - t0)
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


def chain_grid(umax=50, vmax=20, xmax=60):
    for u in range(umax + 1):
        for v in range(vmax + 1):
            for x in range(xmax + 1):
                if (3 * u + 4 * v + x) % 2 == 0 and u + v + x > 0:
                    yield u, v, x


@_timed(1, "transition closure")
def criterion_1():
    t0 = time.perf_counter()
    bad = count = 0
    for u, v, x in chain_grid():
        count += 1
        if transition_distribution_printed(ChainState(u, v, x)).total() != 1:
            bad += 1
    elapsed = time.perf_counter() - t0
    return bad == 0 and elapsed < 10, {"states": count, "not_summing_to_1": bad, "seconds": elapsed}


@_timed(2, "moment identity")
def criterion_2():
    worst = 0.0
    count = 0
    for u, v, x in chain_grid():
        s = ChainState(u, v, x)
        closed = expected_increments(s)
        exact = enumerated_increments(s)
        count += 1
        for c, e in zip(closed, exact):
            worst = max(worst, abs(c - float(e)) / max(1.0, abs(float(e))))
    return worst <= 1e-12, {"states": count, "max_rel_err": worst}


def marginal_weights(x1, x2, u, v):
    rows, weights, total = coupled_weights(x1, x2, u, v)
    out = Counter()
    for (dx1, dx2, _, du, dv, dn1, dn2), w in zip(rows, weights):
        if w:
            out[(du, dv, dx1 + dx2, dn1 + dn2)] += w
    return out, total


@_timed(3, "coupling aggregation")
def criterion_3(reps: int = 10_000):
    mismatches = states = 0
    for u in range(51):
        for v in range(21):
            for x in range(61):
                if (3 * u + 4 * v + x) % 2 or u + v + x == 0:
                    continue
                rows, weights, total = chain_weights(u, v, x)
                want = {d: Fraction(w, total) for d, w in zip(rows, weights) if w}
                for x1 in range(x + 1):
                    got, gt = marginal_weights(x1, x - x1, u, v)
                    states += 1
                    if {d: Fraction(w, gt) for d, w in got.items()} != want:
                        mismatches += 1
    viol = 0
    for r in range(reps):
        s = run_coupled(100, 10, derive_seed(MASTER, 3, r))
        viol += s.domination_violations + s.stack_violations
    return mismatches == 0 and viol == 0, {"coupled_states": states, "law_mismatches": mismatches,
                                           "runs": reps, "pathwise_violations": viol}


ORACLE_CONFIGS = [(n, a) for n in (2, 4, 6, 10) for a in (0, 1, 2)]


@lru_cache(maxsize=None)
def burn_counts(n: int, alpha: int, reps: int) -> Counter:
    return Counter((o.fires, o.clashes) for o in (burn_random(n, alpha, derive_seed(MASTER, 4, n, alpha, r))
                                                 for r in range(reps)))


def chain_counts(n: int, alpha: int, reps: int) -> Counter:
    seeds = [derive_seed(MASTER, 40, n, alpha, r) for r in range(reps)]
    totals, _, _ = run_batch(n, alpha, seeds)
    return Counter(zip(totals[:, 0].tolist(), totals[:, 1].tolist()))


@_timed(4, "oracle equivalence")
def criterion_4(reps: int = 100_000):
    """Burn vs chain two-sample chi-square; the amended law is reported alongside."""
    verdicts, pvals, amended = [], {}, {}
    for n, a in ORACLE_CONFIGS:
        b = burn_counts(n, a, reps)
        rep = chi_square_two_sample(b, chain_counts(n, a, reps), level=0.01)
        verdicts.append(rep.passed)
        pvals[f"{n},{a}"] = rep.p_value
        law = terminal_law(n, a, loop_fix=True)
        amended[f"{n},{a}"] = chi_square_joint(b, law, level=0.01).p_value
    return all(verdicts), {"configs_passing": sum(verdicts), "configs": len(verdicts), "p_chain": pvals,
                           "p_amended_law": amended,
                           "amended_passing": sum(p >= 0.01 for p in amended.values())}


FLUID_T = np.round(np.arange(1, 20) * 0.05, 2)


@dataclass
class Runs:
    n: int
    alpha: int
    totals: np.ndarray  # fires, clashes, zeta, max_x
    snaps: np.ndarray  # (reps, len(steps), 5) at the requested steps
    at_n: np.ndarray  # (reps, 5) state at step n


def _runs(n: int, alpha: int, tag: int, reps: int, steps) -> Runs:
    seeds = [derive_seed(MASTER, tag, r) for r in range(reps)]
    totals, snaps, cps = run_batch(n, alpha, seeds, checkpoints=list(steps) + [n], endgame=True)
    return Runs(n, alpha, totals, snaps[:, np.searchsorted(cps, steps)], snaps[:, int(np.searchsorted(cps, n))])


@lru_cache(maxsize=None)
def fluid_runs(n: int = 100_000, reps: int = 20) -> Runs:
    return _runs(n, int(math.floor(n**0.75)), 5, reps, [int(math.floor(n * t)) for t in FLUID_T])


@lru_cache(maxsize=None)
def diffusion_runs(n: int = 100_000, reps: int = 10_000) -> Runs:
    return _runs(n, int(math.floor(2 * math.sqrt(n))), 7, reps, [n // 2])


@lru_cache(maxsize=None)
def regime2_runs(n: int = 100_000, reps: int = 20) -> Runs:
    return _runs(n, int(math.floor(n**0.8)), 8, reps, [])


@_timed(5, "fluid regime (V, X, N, L)")
def criterion_5():
    r = fluid_runs()
    alpha, sn = r.alpha, r.snaps
    _, v, x, m = fluid_curves(FLUID_T)
    sup_v = np.abs(sn[:, :, 1] / alpha - v).max(axis=1)
    sup_x = np.abs(sn[:, :, 2] / alpha - x).max(axis=1)
    sup_m = np.abs(sn[:, :, 3] / alpha - m).max(axis=1)
    l95 = sn[:, -1, 4] / alpha
    ok = [int(np.sum(s <= 0.08)) for s in (sup_v, sup_x, sup_m)]
    passed = all(k >= 18 for k in ok) and bool(np.all(l95 <= 0.05))
    # context only: distance to the finite-n recursion of expected increments
    mf = _mean_field(r)
    near = [float(np.abs(sn[:, :, k] / alpha - mf[:, k] / alpha).max()) for k in (1, 2, 3)]
    return passed, {"alpha": alpha, "ok_v": ok[0], "ok_x": ok[1], "ok_m": ok[2],
                    "worst_sup_v": float(sup_v.max()), "worst_sup_x": float(sup_x.max()),
                    "worst_sup_m": float(sup_m.max()), "max_L95_over_alpha": float(l95.max()),
                    "vs_mean_field_vxm": near}


def _mean_field(r: Runs) -> np.ndarray:
    return mean_field_path(r.n, r.alpha, [int(math.floor(r.n * t)) for t in FLUID_T])


@_timed(6, "fluid regime (U)")
def criterion_6():
    r = fluid_runs()
    sup_u = np.abs(r.snaps[:, :, 0] / r.n - (1 - FLUID_T)).max(axis=1)
    mf = _mean_field(r)
    return bool(np.all(sup_u <= 0.02)), {
        "worst_sup_u": float(sup_u.max()),
        "mean_field_bias_u": float(np.abs(mf[:, 0] / r.n - (1 - FLUID_T)).max()),
        "vs_mean_field_u": float(np.abs(r.snaps[:, :, 0] - mf[:, 0]).max() / r.n)}


@_timed(7, "diffusion regime")
def criterion_7(reps: int = 10_000):
    r = diffusion_runs(reps=reps)
    rt = math.sqrt(r.n)
    xh, f, c = r.snaps[:, 0, 2] / rt, r.totals[:, 0] / rt, r.totals[:, 1] / rt
    sde = simulate_limit_batch(2.0, reps, derive_seed(MASTER, 70), times=(0.5,), eps=1e-6)
    kx = ks_two_sample(xh, sde.X[:, 0], level=0.01)
    kf = ks_two_sample(f, sde.L1 / 2, threshold=0.05)
    kc = ks_two_sample(c, sde.N1, threshold=0.05)
    return kx.passed and kf.passed and kc.passed, {
        "alpha": r.alpha, "ks_X": kx.statistic, "ks_X_thr": kx.threshold, "ks_F": kf.statistic,
        "ks_C": kc.statistic, "mean_F_scaled": float(f.mean()), "mean_L1_half": float(sde.L1.mean() / 2),
        "mean_C_scaled": float(c.mean()), "mean_N1": float(sde.N1.mean())}


@_timed(8, "dense regime constants")
def criterion_8():
    r = regime2_runs()
    c = r.totals[:, 1] / r.alpha
    f = r.totals[:, 0] / r.alpha
    ok = int(np.sum((np.abs(c - 0.25) <= 0.03) & (f <= 0.03)))
    return ok >= 18, {"alpha": r.alpha, "ok_runs": ok, "mean_C_over_alpha": float(c.mean()),
                      "max_F_over_alpha": float(f.max())}


@_timed(9, "SDE internal consistency")
def criterion_9(reps: int = 10_000):
    ex = simulate_limit_batch(0.0, reps, derive_seed(MASTER, 90), times=(0.5,))
    em = simulate_limit_em(0.0, 2e-5, derive_seed(MASTER, 91), reps=reps, times=(0.5,))
    k1 = ks_two_sample(ex.X[:, 0], em.X[:, 0], threshold=0.02)
    sd = math.sqrt(x0_variance(0.5))
    k2 = ks_one_sample(ex.X[:, 0], lambda z: 2 * _st.norm.cdf(z / sd) - 1, level=0.01)
    ts = (0.1, 0.3, 0.5, 0.7, 0.9)
    worst = -np.inf
    for a in (0.0, 2.0):
        s = simulate_limit_batch(a, reps, derive_seed(MASTER, 92, int(a)), times=ts)
        for j, t in enumerate(ts):
            z = s.X[:, j] / math.sqrt(1 - t)
            for r in (a + 1, a + 2, a + 3):
                bound = tail_bound(a, r)
                freq = float(np.mean(z > r))
                worst = max(worst, freq - bound - 3 * math.sqrt(bound * (1 - bound) / reps))
    return k1.passed and k2.passed and worst <= 0, {
        "ks_explicit_vs_em": k1.statistic, "ks_marginal": k2.statistic, "ks_marginal_thr": k2.threshold,
        "worst_tail_excess": worst}


@_timed(10, "E[N1] resolution")
def criterion_10(reps: int = 100_000):
    inf_val, one_val = n1_mean_candidates()
    s = simulate_limit_batch(0.0, reps, derive_seed(MASTER, 10), times=(), eps=1e-6)
    mean = float(s.N1.mean())
    rel = {"inf": abs(mean - inf_val) / inf_val, "one": abs(mean - one_val) / one_val}
    pick = min(rel, key=rel.get)
    return rel[pick] <= 0.02, {"mc_mean": mean, "mc_se": float(s.N1.std(ddof=1) / math.sqrt(reps)),
                               "candidate_inf": inf_val, "candidate_one": one_val, "decision": pick,
                               "rel_err": rel[pick]}


@_timed(11, "hitting probabilities")
def criterion_11(walks: int = 1_000_000):
    worst = 0.0
    bc = 0.0
    for b in range(2, 51):
        for d in np.round(np.arange(0.01, 0.5, 0.01), 2):
            p = DriftWalkParams(b, float(d))
            h = hitting_profile(p)
            worst = max(worst, float(np.abs(recurrence_residuals(p, h)).max()))
            bc = max(bc, abs(h[0] - 1), abs(h[b]), abs(h[b + 1]))
    zs = {}
    for b, d in ((3, 0.1), (5, 0.3)):
        p = DriftWalkParams(b, d)
        h = hitting_prob_solve(p)
        freq = float(np.mean(drift_walk_batch(p, walks, derive_seed(MASTER, 11, b)) > 0))
        zs[f"{b},{d}"] = (freq - h) / math.sqrt(h * (1 - h) / walks)
    ratios = {}
    for M in (3.2e12, 1e13, 1e14, 1e16):
        p = asymptotic_path(M)
        assert p.d <= 1e-3 and p.b >= 100
        ratios[f"{M:.1e}"] = one_minus_h1(p) / (2 * p.d)
    printed = hitting_prob_printed_closed(DriftWalkParams(2, 0.125))
    solved = hitting_prob_solve(DriftWalkParams(2, 0.125))
    passed = (worst <= 1e-12 and bc == 0 and all(abs(z) <= 3 for z in zs.values())
              and all(0.9 <= r <= 1.1 for r in ratios.values())
              and abs(printed - 0.4724) < 5e-5 and abs(solved - 0.5) < 1e-12)
    return passed, {"max_residual": worst, "max_boundary_err": bc, "mc_z": zs, "asymptotic_ratio": ratios,
                    "printed_b2": printed, "solved_b2": solved}


@_timed(12, "Karp-Sipser")
def criterion_12(reps_c2: int = 200, reps_c4: int = 200):
    forest_ok = 0
    for r in range(1000):
        rng = np.random.default_rng(derive_seed(MASTER, 12, r))
        g = random_forest(int(rng.integers(2, 25)), rng)
        forest_ok += karp_sipser_run(g, derive_seed(MASTER, 120, r)).size == max_matching_exact(g)
    bound_ok = 0
    for r in range(1000):
        rng = np.random.default_rng(derive_seed(MASTER, 121, r))
        n = int(rng.integers(2, 21))
        m = int(rng.integers(0, min(30, n * (n - 1) // 2) + 1))
        g = sample_gnm(n, m, rng)
        res = karp_sipser_run(g, derive_seed(MASTER, 122, r))
        bound_ok += 2 * (max_matching_exact(g) - res.size) <= res.a_n
    c2 = scaling_experiment(2.0, [10_000], reps_c2, derive_seed(MASTER, 123))
    frac = float(np.mean([row[4] > 0 for row in c2.rows]))
    ns = [2**k for k in range(9, 15)]
    c4 = scaling_experiment(4.0, ns, reps_c4, derive_seed(MASTER, 124))
    means = [row[1] for row in c4.table]
    increasing = all(b > a for a, b in zip(means, means[1:]))
    passed = forest_ok == 1000 and bound_ok == 1000 and frac < 0.05 and increasing and 0.1 <= c4.slope <= 0.35
    return passed, {"forest_exact": forest_ok, "d_le_a_half": bound_ok, "c2_frac_a_pos": frac,
                    "c4_means": [round(x, 3) for x in means], "c4_slope": c4.slope, "c4_slope_se": c4.slope_se}


@_timed(13, "endgame assertions")
def criterion_13():
    """Recheck the pathwise bounds on every run of criteria 5, 7 and 8.

    run_batch already raises on a violation, so this recount is a second,
    independent pass over the stored step-n states.
    """
    checked = bad = 0
    for r in (fluid_runs(), diffusion_runs(), regime2_runs()):
        n, alpha, z = r.n, r.alpha, r.totals[:, 2]
        u_n, m_n = r.at_n[:, 0], r.at_n[:, 3]
        bad += int(np.sum((z > 3 * n + 4 * alpha) | (z - n > 3 * m_n + 13 * alpha) | (u_n > m_n + 3 * alpha)))
        checked += len(z)
    return bad == 0, {"runs_checked": checked, "violations": bad}


@_timed(14, "reproducibility")
def criterion_14():
    digests = {}
    with tempfile.TemporaryDirectory() as tmp:
        for kind, extra in (("chain", {"n": 10_000, "alpha": "sqrt:1", "reps": 200}),
                            ("sde", {"a": 1.0, "reps": 150, "npts": 2000}),
                            ("karp-sipser", {"c": 4.0, "N_list": [256, 512], "reps": 40})):
            outs = []
            for w, tag in ((1, "a"), (2, "b"), (1, "c")):
                out = os.path.join(tmp, f"{kind}-{tag}")
                run_experiment(ExperimentConfig(kind=kind, master_seed=7, workers=w, out=out, **extra))
                with open(os.path.join(out, "rows.csv"), "rb") as fh:
                    outs.append(fh.read())
            digests[kind] = len(set(outs)) == 1
    return all(digests.values()), {"identical": digests}


ALL = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
       criterion_8, criterion_9, criterion_10, criterion_11, criterion_12, criterion_13, criterion_14]


def run_all(echo=print) -> list[CriterionResult]:
    out = []
    for fn in ALL:
        r = fn()
        if echo:
            echo(r.line())
        out.append(r)
    return out

