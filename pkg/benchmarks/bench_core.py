"""Benchmark the compiled core against the pure-numpy fallback.

Usage: python benchmarks/bench_core.py [--probes 100000]

Times the three hot kernels at acceptance-scale sizes and reports the speedup
and the worst cross-backend discrepancy.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from gqmc import _core_py
from gqmc.backend import available_backends
from gqmc.kernels import G24, PointConfiguration, kernel_k1
from gqmc.manifold import random_basis_stack


def timeit(fn, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=408, help="design cardinality")
    parser.add_argument("--probes", type=int, default=100_000)
    args = parser.parse_args()

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled core not built; benchmark needs both backends")
        return
    compiled = backends["compiled"]

    rng = np.random.default_rng(0)
    config = PointConfiguration.random(G24, args.n, rng)
    G = config.trace_matrix()
    w = config.weights
    K = kernel_k1().profile(G)
    bases = random_basis_stack(G24, args.n, rng)
    probes = random_basis_stack(G24, args.probes, rng)

    rows = []
    for name, call in [
        (f"moment_sums (n={args.n}, jmax=6)", lambda core: core.moment_sums(G, 6)),
        (f"weighted_double_sum (n={args.n})", lambda core: core.weighted_double_sum(K, w)),
        (f"min_dists ({args.probes} probes x n={args.n})", lambda core: core.min_dists(bases, probes)),
    ]:
        t_py, r_py = timeit(lambda: call(_core_py))
        t_c, r_c = timeit(lambda: call(compiled))
        diff = float(np.max(np.abs(np.asarray(r_py) - np.asarray(r_c))))
        rows.append((name, t_py, t_c, t_py / t_c, diff))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'python':>10}  {'compiled':>10}  {'speedup':>8}  {'max diff':>10}")
    for name, t_py, t_c, speedup, diff in rows:
        print(f"{name:<{width}}  {t_py:>9.4f}s  {t_c:>9.4f}s  {speedup:>7.1f}x  {diff:>10.2e}")


if __name__ == "__main__":
    main()
