"""Compare the numba kernels with their pure-numpy counterparts.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The python path of each jitted kernel is its ``py_func``; the brute-force
oracle has a separate vectorized numpy implementation.
"""

import argparse
import time

import numpy as np

from advgauss._accel import NUMBA_ENABLED
from advgauss.linalg import cholesky
from advgauss.norms import LINF, lp_lmo, project_l1
from advgauss.solver import _brute_force_loops, _brute_force_numpy, apg_kernel, fw_kernel, power_lambda_max


def best_of(fn, repeat):
    fn()  # warm-up (compilation or cache load)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    d = 50
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    A = cholesky((q * np.exp(rng.uniform(0, np.log(10), d))) @ q.T).precision
    mu = np.full(d, 0.1)
    mu[0] += 1.0
    x = rng.standard_normal(d)
    L = 1.05 * power_lambda_max(A, 50)
    z0 = np.zeros(d)
    A3 = A[:3, :3].copy()
    mu3 = mu[:3].copy()
    return {
        "lmo linf d=50 (x1000)": (
            lambda: [lp_lmo(x, LINF, np.inf, 0.1) for _ in range(1000)],
            lambda: [lp_lmo.py_func(x, LINF, np.inf, 0.1) for _ in range(1000)],
        ),
        "project l1 d=50 (x1000)": (
            lambda: [project_l1(x, 1.0) for _ in range(1000)],
            lambda: [project_l1.py_func(x, 1.0) for _ in range(1000)],
        ),
        "apg linf d=50": (
            lambda: apg_kernel(A, mu, z0, LINF, np.inf, 0.1, 1e-9, 10_000, L),
            lambda: apg_kernel.py_func(A, mu, z0, LINF, np.inf, 0.1, 1e-9, 10_000, L),
        ),
        "fw linf d=50 (500 it)": (
            lambda: fw_kernel(A, mu, z0, LINF, np.inf, 0.1, -1.0, 500, False),
            lambda: fw_kernel.py_func(A, mu, z0, LINF, np.inf, 0.1, -1.0, 500, False),
        ),
        "brute force d=3 grid 101": (
            lambda: _brute_force_loops(A3, mu3, LINF, np.inf, 0.5, 101),
            lambda: _brute_force_numpy(A3, mu3, LINF, np.inf, 0.5, 101),
        ),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not NUMBA_ENABLED:
        print("numba disabled: both columns run the python path")
    print(f"{'kernel':<28}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, (fast, slow) in cases(np.random.default_rng(0)).items():
        tf, ts = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{name:<28}{tf * 1e3:>12.3f}{ts * 1e3:>12.3f}{ts / tf:>9.1f}x")


if __name__ == "__main__":
    main()
