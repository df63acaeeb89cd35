"""Time the grid transform kernels: numba loops against the numpy fallback.

Run as: python3 benchmarks/bench_kernels.py [--sizes 1001,3001,6001] [--repeats 3]
The numba path is compiled and warmed before timing so the table reflects
steady-state throughput, not compilation.
"""

import argparse
import time

import numpy as np

from quadenv import kernels


def _time_one(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        tic = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - tic)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="1001,3001,6001")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    try:
        numba_impl = kernels._build_numba()
    except ImportError:
        numba_impl = None
        print("numba not importable; timing the numpy path only")

    numpy_impl = {"inner": kernels.inner_pass_numpy,
                  "outer": kernels.outer_pass_numpy,
                  "legendre": kernels.legendre_pass_numpy}

    header = f"{'kernel':<10} {'n':>6} {'numpy':>10}"
    if numba_impl:
        header += f" {'numba':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))

    rng = np.random.default_rng(0)
    for n in sizes:
        xs = np.linspace(-3.0, 3.0, n)
        vals = rng.random(n) * 2.0
        vals[rng.random(n) < 0.05] = np.inf
        vals[n // 2] = 0.0
        gamma = 2.0
        ys = np.linspace(-2.0, 2.0, n)
        jobs = {"inner": (vals, xs, gamma),
                "outer": (np.minimum(vals, 3.0), xs, gamma),
                "legendre": (xs, vals, ys)}
        for name, job in jobs.items():
            if numba_impl:
                numba_impl[name](*job)  # warm the jit cache
            t_np = _time_one(numpy_impl[name], job, args.repeats)
            line = f"{name:<10} {n:>6} {t_np:>9.4f}s"
            if numba_impl:
                t_nb = _time_one(numba_impl[name], job, args.repeats)
                line += f" {t_nb:>9.4f}s {t_np / t_nb:>7.1f}x"
            print(line)

    # the bundle master solve is many tiny iterations, so time it on its own
    k, dims = 30, 8
    S = rng.standard_normal((k, dims))
    G = S @ S.T
    c = rng.standard_normal(k)
    lam0 = np.full(k, 1.0 / k)
    lip = float(np.linalg.eigvalsh(G)[-1])
    job = (G, c, lam0, lip, 2000, 0.0)
    if numba_impl:
        numba_impl["simplex_qp"](*job)
    t_np = _time_one(kernels.simplex_qp_pass_numpy, job, args.repeats)
    line = f"{'simplex_qp':<10} {k:>6} {t_np:>9.4f}s"
    if numba_impl:
        t_nb = _time_one(numba_impl["simplex_qp"], job, args.repeats)
        line += f" {t_nb:>9.4f}s {t_np / t_nb:>7.1f}x"
    print(line)


if __name__ == "__main__":
    main()
