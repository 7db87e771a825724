"""Time the numba and numpy flavours of each hot kernel.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--dim 144]

Prints a TSV row per kernel with the best-of-N wall time of each flavour.
The numba flavours are called once first so compilation is not timed.
"""

import argparse
import time

import numpy as np

from acceptrank import kernels
from acceptrank._accel import HAVE_NUMBA


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases(dim, rows, pairs, seed=0):
    rng = np.random.default_rng(seed)
    b = rng.normal(size=(rows, dim))
    cov = b.T @ b / rows
    X = rng.normal(size=(rows, 5))
    y = X @ rng.normal(size=5)
    order = rng.permutation(rows)
    D = rng.normal(size=(pairs, 5))
    labels = np.where(rng.random(pairs) < 0.5, -1.0, 1.0)
    porder = rng.permutation(pairs)

    def jacobi(impl):
        return lambda: impl(cov.copy(), 1e-12 * np.linalg.norm(cov), 100)

    def linreg(impl):
        return lambda: impl(X, y, np.zeros(5), np.zeros(1), order, 0.01)

    def svr(impl):
        return lambda: impl(X, y, np.zeros(5), np.zeros(1), order, 0.01, 0.1, 1.0)

    def ranksvm(impl):
        return lambda: impl(D, labels, np.zeros(5), porder, 0.01, 0.01)

    return [
        (f"jacobi {dim}x{dim}", jacobi(kernels._jacobi_numba), jacobi(kernels._jacobi_numpy)),
        (f"linreg epoch n={rows}", linreg(kernels._linreg_epoch_numba), linreg(kernels._linreg_epoch_numpy)),
        (f"svr epoch n={rows}", svr(kernels._svr_epoch_numba), svr(kernels._svr_epoch_numpy)),
        (f"ranksvm epoch m={pairs}", ranksvm(kernels._ranksvm_epoch_numba), ranksvm(kernels._ranksvm_epoch_numpy)),
    ]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--dim", type=int, default=144)
    p.add_argument("--rows", type=int, default=2000)
    p.add_argument("--pairs", type=int, default=50_000)
    args = p.parse_args(argv)
    if not HAVE_NUMBA:
        print("# numba is not installed; the 'numba' column runs the same loops in plain Python")
    print("kernel\tnumba_s\tnumpy_s\tspeedup")
    for name, fast, slow in cases(args.dim, args.rows, args.pairs):
        fast()
        t_fast = best_of(fast, args.repeat)
        t_slow = best_of(slow, args.repeat)
        print(f"{name}\t{t_fast:.5f}\t{t_slow:.5f}\t{t_slow / t_fast:.1f}x")


if __name__ == "__main__":
    main()
