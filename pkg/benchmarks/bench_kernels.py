"""Timing comparison of the jitted and pure-numpy kernel quadrature backends.

The only hot loop in the package is the finite-time s-kernel quadrature; both
backends implement the identical adaptive Gauss-Kronrod scheme.  Run with

    python3 benchmarks/bench_kernels.py

The jitted backend is warmed up before timing so compilation is excluded.
"""

import time

import numpy as np

from nambuflow._kernels_numpy import s_finite_batch as s_numpy

try:
    from nambuflow._kernels_numba import s_finite_batch as s_numba
except ImportError:
    s_numba = None

RTOL, ATOL, MAX_EVALS = 1e-10, 1e-13, 2_000_000


def batch(n, seed):
    rng = np.random.default_rng(seed)
    # shifted-mode frequencies of a damped model: Im z <= 0, moderate Re
    z = rng.uniform(-40, 40, n) - 1j * rng.uniform(0.01, 2.0, n)
    return np.ascontiguousarray(z)


def run(fn, zs, tau, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        vals, errs, status = fn(zs, tau, RTOL, ATOL, MAX_EVALS)
        best = min(best, time.perf_counter() - t0)
    return best, vals


def main():
    sizes = [8, 64, 512]
    taus = [0.7, 5.0, 25.0]
    if s_numba is not None:
        s_numba(batch(4, 0), 1.0, RTOL, ATOL, MAX_EVALS)  # JIT warmup
    print(f"{'n':>5} {'tau':>6} {'numpy [ms]':>12} {'numba [ms]':>12} "
          f"{'speedup':>8} {'max |diff|':>11}")
    for n in sizes:
        zs = batch(n, seed=n)
        for tau in taus:
            t_np, v_np = run(s_numpy, zs, tau, repeats=3)
            if s_numba is None:
                print(f"{n:>5} {tau:>6.1f} {1e3 * t_np:>12.2f} "
                      f"{'n/a':>12} {'n/a':>8} {'n/a':>11}")
                continue
            t_nb, v_nb = run(s_numba, zs, tau, repeats=3)
            diff = float(np.abs(v_np - v_nb).max())
            print(f"{n:>5} {tau:>6.1f} {1e3 * t_np:>12.2f} "
                  f"{1e3 * t_nb:>12.2f} {t_np / t_nb:>8.1f} {diff:>11.2e}")


if __name__ == "__main__":
    main()
