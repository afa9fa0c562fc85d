"""Compare the numba and pure-numpy kernel backends.

Times the per-mode cost and cost+gradient kernels over a range of element
counts, plus an end-to-end solve, and prints a table with the speedup.
Run: python benchmarks/bench_backends.py
"""

import time

import numpy as np

from starris import _accel, objective
from starris.channel import default_config

REPEAT = 2000


def kernel_inputs(n, users=2, seed=0):
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-np.pi, np.pi, n)
    kappa_users = rng.uniform(-np.pi, np.pi, (users, n))
    const = rng.normal(0.0, 1.0, users)
    weight = rng.uniform(0.05, 0.5, users)
    kappa_den = rng.uniform(-np.pi, np.pi, n)
    sw = complex(np.exp(1j * rng.uniform(-np.pi, np.pi, 8)).sum())
    return theta, kappa_users, const, weight, kappa_den, sw.real, sw.imag, 0.9, float(8 * n)


def time_call(fn, args, repeat=REPEAT):
    fn(*args)  # warm-up (and JIT compile)
    best = np.inf
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def time_solve(grid):
    cfg = default_config(n_x=grid[0], n_z=grid[1], max_iter=100)
    objective.optimize_phases(cfg, max_iter=3)  # warm-up
    t0 = time.perf_counter()
    _, trace = objective.optimize_phases(cfg, tol=1e-300)
    return (time.perf_counter() - t0) / max(trace.iterations, 1)


def main():
    if not _accel.NUMBA_AVAILABLE:
        print("numba not importable; nothing to compare")
        return
    print(f"active backend: {_accel.BACKEND}")
    print(f"{'kernel':<12} {'N':>5} {'numpy':>12} {'numba':>12} {'speedup':>8}")
    for n in (64, 256, 1024):
        args = kernel_inputs(n)
        t_np = time_call(_accel.mode_cost_numpy, args)
        t_nb = time_call(_accel.mode_cost_numba, args)
        print(f"{'cost':<12} {n:>5} {t_np * 1e6:>10.1f}us {t_nb * 1e6:>10.1f}us {t_np / t_nb:>7.1f}x")
        t_np = time_call(_accel.mode_cost_grad_numpy, args)
        t_nb = time_call(_accel.mode_cost_grad_numba, args)
        print(f"{'cost+grad':<12} {n:>5} {t_np * 1e6:>10.1f}us {t_nb * 1e6:>10.1f}us {t_np / t_nb:>7.1f}x")

    print("\nend-to-end solver, per-iteration wall time (active backend):")
    for grid in ((8, 8), (16, 8), (16, 16)):
        t = time_solve(grid)
        print(f"  N={grid[0] * grid[1]:>4}: {t * 1e6:.0f}us/iteration")


if __name__ == "__main__":
    main()
