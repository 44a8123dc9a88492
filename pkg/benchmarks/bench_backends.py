"""Compare the compiled batch kernels against the pure-Python loop.

Usage: python benchmarks/bench_backends.py [--T 20000] [--N 10] [--repeat 3]

Each learner runs the same iid uniform stream through both backends;
the table reports wall time per backend, the speedup, and the largest
prediction difference (should sit at floating-point noise).
"""
import argparse
import time

import numpy as np

from isotune.backend import BACKEND, run
from isotune.harness import LossStream, generate, losses_to_prices
from isotune.learners import ALGOS, LearnerConfig


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--T", type=int, default=20_000)
    ap.add_argument("--N", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if BACKEND != "compiled":
        print("compiled backend unavailable; timings below are python vs python")

    losses = generate(LossStream("iid_uniform", n=args.N, t=args.T, seed=5))
    print(f"T={args.T} N={args.N} repeat={args.repeat} (best of)")
    print(f"{'algo':<13}{'compiled s':>12}{'python s':>12}{'speedup':>9}{'max pred diff':>15}")
    for algo in ALGOS:
        cfg = LearnerConfig.default(algo, args.N)
        feed = losses_to_prices(losses) if algo == "isosoftbayes" else losses
        tc = _time(lambda: run(cfg, feed), args.repeat)
        tp = _time(lambda: run(cfg, feed, force_python=True), args.repeat)
        a = run(cfg, feed)
        b = run(cfg, feed, force_python=True)
        diff = float(np.max(np.abs(a.predictions - b.predictions)))
        print(f"{algo:<13}{tc:>12.4f}{tp:>12.4f}{tp / tc:>9.1f}{diff:>15.2e}")


if __name__ == "__main__":
    main()
