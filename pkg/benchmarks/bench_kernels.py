"""Time the compiled kernels against the numpy fallback.

Usage: ``python benchmarks/bench_kernels.py [--n 200] [--iters 5000] [--repeat 3]``
"""

import argparse
import timeit

import numpy as np

from hsplus import _backend
from hsplus.kappa_posterior import _batch_rule
from hsplus.mcmc import McmcConfig, run_gibbs
from hsplus.priors import PriorSpec


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--iters", type=int, default=5000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    y = np.r_[np.full(args.n // 10, 7.0), np.zeros(args.n - args.n // 10)] + rng.standard_normal(args.n)
    cfg = McmcConfig(iterations=args.iters, burn_in=args.iters // 5, seed=1)
    nodes, weights = _batch_rule(PriorSpec("hs+", 0.05))
    grid = np.abs(np.linspace(-30, 30, 100_000))

    cases = {
        f"gibbs hs+ n={args.n} iters={args.iters}": lambda b: run_gibbs(y, "hs+", cfg, backend=b),
        f"gibbs hs  n={args.n} iters={args.iters}": lambda b: run_gibbs(y, "hs", cfg, backend=b),
        f"batch kappa mean, {grid.size} points": lambda b: _backend.kernels(b).batch_kappa_mean(grid, nodes, weights),
    }
    backends = _backend.available()
    print(f"{'case':<40}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for label, fn in cases.items():
        best = {b: min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat)) for b in backends}
        row = f"{label:<40}" + "".join(f"{best[b]:>11.3f}s" for b in backends)
        if len(backends) == 2:
            row += f"{best['numpy'] / best['cython']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
