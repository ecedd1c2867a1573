"""Wall-clock comparison of the pure-Python and compiled kernels.

    python benchmarks/bench_kernels.py [--n 20000] [--reps 5]
"""
import argparse
import time

import numpy as np

from fireprop import kernels
from fireprop.hitting import DriftWalkParams, _rational
from fireprop.rng import derive_seed


def _best(fn, reps):
    best = float("inf")
    for r in range(reps):
        t0 = time.perf_counter()
        fn(r)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()
    n = args.n
    alpha = int(np.sqrt(n))
    walk = DriftWalkParams(200, 0.002)
    num, den = _rational(walk.d)
    cps = np.array([n // 2, n], dtype=np.int64)
    cases = {
        "chain": lambda k, r: k.run_chain(n, alpha, derive_seed(1, r), cps),
        "coupled": lambda k, r: k.run_coupled(n, alpha, derive_seed(2, r)),
        "drift_walk": lambda k, r: k.drift_walk(walk.b, num, den, derive_seed(3, r), 10**9),
    }
    print(f"n={n} alpha={alpha} best of {args.reps}")
    print(f"{'kernel':<12}" + "".join(f"{b:>12}" for b in kernels.BACKENDS) + f"{'speedup':>10}")
    for name, case in cases.items():
        times = {b: _best(lambda r, m=m: case(m, r), args.reps) for b, m in kernels.BACKENDS.items()}
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:<12}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values()) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
