"""Benchmark the two SMO solver backends on the same kernel matrix.

Both backends implement the identical sweep schedule and PRNG, so beyond
timing, this checks that they return bitwise-identical dual coefficients.

Usage: python benchmarks/bench_smo.py [--n 800] [--repeats 3]
"""

import argparse
import time

import numpy as np

from clinlab.svm.kernel import rbf_kernel_matrix
from clinlab.svm.smo import solver_backends


def make_problem(n: int, d: int, seed: int):
    """Two overlapping gaussian clouds (the overlap keeps the solver busy)."""
    rng = np.random.default_rng(seed)
    half = n // 2
    x = np.vstack(
        [
            rng.normal(-0.7, 1.0, size=(half, d)),
            rng.normal(0.7, 1.0, size=(n - half, d)),
        ]
    )
    y = np.concatenate([-np.ones(half), np.ones(n - half)])
    return x, y


def dual_objective(k: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
    coef = alpha * y
    return float(alpha.sum() - 0.5 * coef @ k @ coef)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=800, help="training rows")
    parser.add_argument("--d", type=int, default=4, help="feature count")
    parser.add_argument("--gamma", type=float, default=0.5)
    parser.add_argument("--cost", type=float, default=10.0)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = solver_backends()
    print(f"backends: {', '.join(backends)}")
    x, y = make_problem(args.n, args.d, args.seed)
    k = rbf_kernel_matrix(x, x, args.gamma)
    c_row = np.full(args.n, args.cost)

    results = {}
    for name, impl in backends.items():
        best = float("inf")
        out = None
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            out = impl.solve(k, y, c_row, 1e-3, 5, 1000, args.seed)
            best = min(best, time.perf_counter() - t0)
        alpha, bias, sweeps, converged = out
        results[name] = (alpha, bias, sweeps, best)
        obj = dual_objective(k, y, alpha)
        note = "" if converged else "  (sweep cap hit)"
        print(
            f"{name:>7}: {best * 1e3:8.1f} ms  sweeps {sweeps:4d}  "
            f"support {int((alpha > 1e-12).sum())}  objective {obj:.6f}{note}"
        )

    if len(results) == 2:
        py_alpha, py_bias, py_sweeps, py_t = results["python"]
        cy_alpha, cy_bias, cy_sweeps, cy_t = results["cython"]
        if not np.array_equal(py_alpha, cy_alpha):
            print("MISMATCH: dual coefficients differ between backends")
            return 1
        if py_bias != cy_bias or py_sweeps != cy_sweeps:
            print("MISMATCH: bias or sweep count differs between backends")
            return 1
        print(f"backends agree bitwise; cython speedup {py_t / cy_t:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
