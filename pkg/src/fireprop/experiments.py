"""Declarative experiments: config parsing, replicate fan-out, ordered output."""
from __future__ import annotations

import csv
import io
import json
import math
import multiprocessing as mp
import os
import subprocess
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Optional

import numpy as np

from . import __version__
from .rng import derive_seed

KINDS = (
    "chain",
    "coupled",
    "oracle-equivalence",
    "sde",
    "fluid",
    "fluid-check",
    "diffusion-check",
    "karp-sipser",
    "hitprob",
    "validate-all",
)

BLOCK = 64  # replicates per work unit; output never depends on it


class ConfigError(ValueError):
    def __init__(self, fld: str, msg: str):
        super().__init__(f"{fld}: {msg}")
        self.field = fld


def alpha_of(spec, n: int) -> int:
    """Evaluate an alpha spec: an integer, ``"sqrt:a"`` (floor a sqrt n) or ``"pow:p"`` (floor n^p)."""
    if isinstance(spec, bool):
        raise ConfigError("alpha", f"not an alpha spec: {spec!r}")
    if isinstance(spec, int):
        val = spec
    elif isinstance(spec, str) and ":" in spec:
        kind, arg = spec.split(":", 1)
        try:
            x = float(arg)
        except ValueError:
            raise ConfigError("alpha", f"bad number in {spec!r}") from None
        if kind == "sqrt":
            val = int(math.floor(x * math.sqrt(n) + 1e-9))
        elif kind == "pow":
            val = int(math.floor(n**x + 1e-9))
        elif kind == "const":
            val = int(x)
        else:
            raise ConfigError("alpha", f"unknown alpha spec kind {kind!r}")
    elif isinstance(spec, str) and spec.lstrip("-").isdigit():
        val = int(spec)
    else:
        raise ConfigError("alpha", f"not an alpha spec: {spec!r}")
    if val < 0:
        raise ConfigError("alpha", f"evaluates to {val} < 0")
    return val


@dataclass
class ExperimentConfig:
    kind: str = "chain"
    n: int = 10000
    alpha: object = "sqrt:1"
    a: float = 0.0
    c: float = 4.0
    N_list: list = field(default_factory=lambda: [512, 1024, 2048])
    reps: int = 100
    master_seed: Optional[int] = None
    eps: float = 1e-4
    npts: int = 20000
    dt: float = 1e-4
    scheme: str = "explicit"
    times: list = field(default_factory=lambda: [0.5])
    b_list: list = field(default_factory=lambda: [2, 3, 5, 10])
    d_list: list = field(default_factory=lambda: [0.01, 0.1, 0.25])
    grid_size: int = 101
    out: str = "runs/out"
    workers: int = 1
    backend: Optional[str] = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(sorted(extra)[0], "unknown config field")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError("kind", f"must be one of {', '.join(KINDS)}")
        if not isinstance(self.reps, int) or self.reps < 1:
            raise ConfigError("reps", "must be an integer >= 1")
        if self.master_seed is None:
            raise ConfigError("master_seed", "required (no implicit seeding)")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed", "must be an unsigned 64-bit integer")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers", "must be an integer >= 1")
        if self.kind in ("chain", "coupled", "oracle-equivalence", "fluid-check", "diffusion-check"):
            if not isinstance(self.n, int) or self.n < 2 or self.n % 2:
                raise ConfigError("n", "must be an even integer >= 2")
            alpha_of(self.alpha, self.n)
        if self.a < 0:
            raise ConfigError("a", "must be nonnegative")
        if self.kind == "sde":
            if self.scheme not in ("explicit", "em"):
                raise ConfigError("scheme", "must be 'explicit' or 'em'")
            if self.eps <= 0 or self.eps >= 1:
                raise ConfigError("eps", "must lie in (0, 1)")
            if self.scheme == "em" and not 0 < self.dt <= 1e-2:
                raise ConfigError("dt", "must lie in (0, 1e-2]")
            if any(not 0 <= t < 1 for t in self.times):
                raise ConfigError("times", "must lie in [0, 1)")
        if self.kind == "karp-sipser":
            if self.c <= 0:
                raise ConfigError("c", "must be positive")
            if not self.N_list or any(not isinstance(v, int) or v < 2 for v in self.N_list):
                raise ConfigError("N_list", "must be a nonempty list of integers >= 2")
        if self.kind == "hitprob":
            if any(not isinstance(b, int) or b < 2 for b in self.b_list):
                raise ConfigError("b_list", "entries must be integers >= 2")
            if any(not 0 < d < 0.5 for d in self.d_list):
                raise ConfigError("d_list", "entries must lie in (0, 1/2)")
        if self.kind == "fluid" and self.grid_size < 2:
            raise ConfigError("grid_size", "must be >= 2")

    @property
    def alpha_value(self) -> int:
        return alpha_of(self.alpha, self.n)


def build_id() -> str:
    """``<version>`` plus ``git describe`` output when run from a checkout."""
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        desc = subprocess.run(
            ["git", "describe", "--always", "--tags"], cwd=here, capture_output=True, text=True, timeout=5
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        desc = ""
    return f"{__version__}+{desc}" if desc else __version__


# work units -------------------------------------------------------------------


def _blocks(reps: int):
    return [(s, min(s + BLOCK, reps)) for s in range(0, reps, BLOCK)]


def _chain_block(cfg: ExperimentConfig, lo: int, hi: int) -> list[list]:
    from .chain import run_batch

    n, alpha = cfg.n, cfg.alpha_value
    seeds = [derive_seed(cfg.master_seed, r) for r in range(lo, hi)]
    totals, _, _ = run_batch(n, alpha, seeds, backend=cfg.backend)
    return [[r, n, alpha, int(t[0]), int(t[1]), int(t[2])] for r, t in zip(range(lo, hi), totals)]


def _coupled_block(cfg: ExperimentConfig, lo: int, hi: int) -> list[list]:
    from .coupling import run_coupled

    n, alpha = cfg.n, cfg.alpha_value
    rows = []
    for r in range(lo, hi):
        s = run_coupled(n, alpha, derive_seed(cfg.master_seed, r), backend=cfg.backend)
        rows.append([r, n, alpha, s.fires, s.clashes, s.zeta, s.max_x1, s.max_x2, s.max_y,
                     s.domination_violations, s.stack_violations])
    return rows


def _oracle_block(cfg: ExperimentConfig, lo: int, hi: int) -> list[list]:
    from .oracle import burn_random

    n, alpha = cfg.n, cfg.alpha_value
    rows = []
    for r in range(lo, hi):
        out = burn_random(n, alpha, derive_seed(cfg.master_seed, r))
        rows.append([r, n, alpha, out.fires, out.clashes])
    return rows


FLUID_TIMES = tuple(round(0.05 * k, 2) for k in range(1, 20))


def _fluid_check_block(cfg: ExperimentConfig, lo: int, hi: int) -> list[list]:
    from .chain import run_batch
    from .limit import fluid_curves

    n, alpha = cfg.n, cfg.alpha_value
    steps = [int(math.floor(n * t)) for t in FLUID_TIMES]
    seeds = [derive_seed(cfg.master_seed, r) for r in range(lo, hi)]
    _, snaps, cps = run_batch(n, alpha, seeds, checkpoints=steps, backend=cfg.backend)
    idx = np.searchsorted(cps, steps)
    u, v, x, m = (np.asarray(c) for c in fluid_curves(np.array(FLUID_TIMES)))
    rows = []
    for k, r in enumerate(range(lo, hi)):
        sn = snaps[k, idx].astype(float)
        rows.append([
            r, n, alpha,
            float(np.max(np.abs(sn[:, 0] / n - u))),
            float(np.max(np.abs(sn[:, 1] / alpha - v))) if alpha else 0.0,
            float(np.max(np.abs(sn[:, 2] / alpha - x))) if alpha else 0.0,
            float(np.max(np.abs(sn[:, 3] / alpha - m))) if alpha else 0.0,
            float(sn[-1, 4] / alpha) if alpha else 0.0,
        ])
    return rows


def _diffusion_block(cfg: ExperimentConfig, lo: int, hi: int) -> list[list]:
    from .chain import run_batch

    n, alpha = cfg.n, cfg.alpha_value
    half = n // 2
    seeds = [derive_seed(cfg.master_seed, r) for r in range(lo, hi)]
    totals, snaps, cps = run_batch(n, alpha, seeds, checkpoints=[half], backend=cfg.backend)
    k = int(np.searchsorted(cps, half))
    rt = math.sqrt(n)
    return [[r, n, alpha, float(snaps[j, k, 2] / rt), float(totals[j, 0] / rt), float(totals[j, 1] / rt)]
            for j, r in enumerate(range(lo, hi))]


def _sde_block(cfg: ExperimentConfig, lo: int, hi: int) -> list[list]:
    from .limit import simulate_limit_batch, simulate_limit_em

    seed = derive_seed(cfg.master_seed, lo)
    if cfg.scheme == "explicit":
        s = simulate_limit_batch(cfg.a, hi - lo, seed, times=cfg.times, eps=cfg.eps, npts=cfg.npts)
    else:
        s = simulate_limit_em(cfg.a, cfg.dt, seed, reps=hi - lo, eps=cfg.eps, times=cfg.times)
    return [[r, *map(float, s.X[j]), float(s.L1[j]), float(s.N1[j])] for j, r in enumerate(range(lo, hi))]


def _ks_block(cfg: ExperimentConfig, lo: int, hi: int) -> list[list]:
    from .karp_sipser import ks_replicate

    jobs = [(n, r) for n in cfg.N_list for r in range(cfg.reps)][lo:hi]
    return [list(ks_replicate(cfg.c, n, r, cfg.master_seed)) for n, r in jobs]


def _dispatch(args):
    fn, cfg, lo, hi = args
    return fn(cfg, lo, hi)


def _fan_out(fn: Callable, cfg: ExperimentConfig, total: int) -> list[list]:
    """Run ``fn`` over replicate blocks; rows come back in replicate order."""
    jobs = [(fn, cfg, lo, hi) for lo, hi in _blocks(total)]
    if cfg.workers == 1 or len(jobs) == 1:
        parts = [_dispatch(j) for j in jobs]
    else:
        method = "fork" if "fork" in mp.get_all_start_methods() else "spawn"
        with mp.get_context(method).Pool(cfg.workers) as pool:
            parts = pool.map(_dispatch, jobs, chunksize=1)
    return [row for part in parts for row in part]


# reference data -----------------------------------------------------------------


def emit_fluid_reference(grid) -> str:
    """CSV text with columns t, u, v, x, m."""
    from .limit import fluid_curves

    g = np.asarray(grid, dtype=float)
    u, v, x, m = (np.atleast_1d(c) for c in fluid_curves(g))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "u", "v", "x", "m"])
    for row in zip(g, u, v, x, m):
        w.writerow([repr(float(c)) for c in row])
    return buf.getvalue()


def _hitprob_rows(cfg: ExperimentConfig) -> list[list]:
    from .hitting import (DriftWalkParams, drift_walk_batch, hitting_prob_corrected_closed,
                          hitting_prob_printed_closed, hitting_prob_solve)

    rows = []
    for i, b in enumerate(cfg.b_list):
        for j, d in enumerate(cfg.d_list):
            p = DriftWalkParams(int(b), float(d))
            h = hitting_prob_solve(p)
            visits = drift_walk_batch(p, cfg.reps, derive_seed(cfg.master_seed, i, j), backend=cfg.backend)
            freq = float(np.mean(visits > 0))
            rows.append([b, d, h, hitting_prob_printed_closed(p), hitting_prob_corrected_closed(p), freq,
                         math.sqrt(h * (1 - h) / cfg.reps)])
    return rows


# driver ---------------------------------------------------------------------------

HEADERS = {
    "chain": ["rep", "n", "alpha", "fires", "clashes", "zeta"],
    "coupled": ["rep", "n", "alpha", "fires", "clashes", "zeta", "max_x1", "max_x2", "max_y",
                "domination_violations", "stack_violations"],
    "oracle-equivalence": ["rep", "n", "alpha", "fires", "clashes"],
    "fluid-check": ["rep", "n", "alpha", "sup_u", "sup_v", "sup_x", "sup_m", "L95_over_alpha"],
    "diffusion-check": ["rep", "n", "alpha", "X_half", "F_scaled", "C_scaled"],
    "karp-sipser": ["N", "c", "rep", "matching_size", "a_n", "made_random_choice"],
    "hitprob": ["b", "d", "h1_solve", "h1_printed", "h1_corrected", "mc_freq", "mc_se"],
    "fluid": ["t", "u", "v", "x", "m"],
}

BLOCK_FNS = {
    "chain": _chain_block,
    "coupled": _coupled_block,
    "oracle-equivalence": _oracle_block,
    "fluid-check": _fluid_check_block,
    "diffusion-check": _diffusion_block,
    "sde": _sde_block,
}


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _summarize(kind: str, header, rows) -> dict:
    out: dict = {"rows": len(rows)}
    if not rows or kind in ("fluid", "hitprob"):
        return out
    arr = np.asarray([[float(v) for v in r] for r in rows])
    for k, name in enumerate(header):
        if name in ("rep", "n", "alpha", "N", "c"):
            continue
        col = arr[:, k]
        out[f"mean_{name}"] = float(col.mean())
        out[f"sd_{name}"] = float(col.std(ddof=1)) if len(col) > 1 else 0.0
    return out


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run ``cfg`` and write rows.csv, summary.json and config.json under ``cfg.out``."""
    cfg.validate()
    os.makedirs(cfg.out, exist_ok=True)
    kind = cfg.kind
    if kind == "validate-all":
        from .acceptance import run_all

        results = run_all()
        summary = {"kind": kind, "build": build_id(), "config": asdict(cfg),
                   "criteria": [r.to_dict() for r in results],
                   "passed": sum(r.passed for r in results), "total": len(results)}
        header, rows = ["criterion", "name", "passed"], [[r.number, r.name, int(r.passed)] for r in results]
    else:
        if kind == "fluid":
            header = HEADERS["fluid"]
            text = emit_fluid_reference(np.linspace(0.0, 1.0, cfg.grid_size))
            rows = [line.split(",") for line in text.splitlines()[1:]]
        elif kind == "hitprob":
            header, rows = HEADERS["hitprob"], _hitprob_rows(cfg)
        elif kind == "karp-sipser":
            header = HEADERS["karp-sipser"]
            rows = _fan_out(_ks_block, cfg, len(cfg.N_list) * cfg.reps)
        elif kind == "sde":
            header = ["rep", *[f"X_{t:g}" for t in cfg.times], "L1", "N1"]
            rows = _fan_out(_sde_block, cfg, cfg.reps)
        else:
            header = HEADERS[kind]
            rows = _fan_out(BLOCK_FNS[kind], cfg, cfg.reps)
        summary = {"kind": kind, "build": build_id(), "config": asdict(cfg),
                   "stats": _summarize(kind, header, rows)}
        if kind == "karp-sipser":
            summary["stats"].update(_ks_summary(cfg, rows))
    _write_csv(os.path.join(cfg.out, "rows.csv"), header, rows)
    with open(os.path.join(cfg.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(cfg.out, "config.json"), "w") as fh:
        fh.write(cfg.to_json())
    return summary


def _ks_summary(cfg: ExperimentConfig, rows) -> dict:
    from .stats import slope_fit

    table = {}
    for n in cfg.N_list:
        a = np.array([r[4] for r in rows if r[0] == n], dtype=float)
        table[str(n)] = {"mean_a_n": float(a.mean()), "frac_a_n_positive": float(np.mean(a > 0))}
    pts = [(math.log(n), math.log(v["mean_a_n"])) for n, v in zip(cfg.N_list, table.values()) if v["mean_a_n"] > 0]
    out: dict = {"by_N": table}
    if len(pts) >= 2:
        out["loglog_slope"], out["loglog_slope_se"] = slope_fit(pts)
    return out
