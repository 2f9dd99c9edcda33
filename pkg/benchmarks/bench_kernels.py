"""Time the numba and numpy kernels on random curvature tensors.

    python3 benchmarks/bench_kernels.py [--sizes 10000 100000 1000000] [--dims 3 4 5]
"""

import argparse
import time

import numpy as np

from chen_bounds import _kernels
from chen_bounds.forge import GeneratorSpec, make_instance
from chen_bounds.invariants import random_frames, random_planes


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[10_000, 100_000, 1_000_000])
    ap.add_argument("--dims", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba is not importable; only the numpy path can run")
        return

    print(f"{'kernel':<16}{'n':>3}{'count':>10}{'numpy s':>11}{'numba s':>11}{'speedup':>9}{'max diff':>11}")
    for n in args.dims:
        S = make_instance(GeneratorSpec(m=n, n=n, seed=n, frame="rotated"))
        R = np.ascontiguousarray(S.curvature)
        # compile outside the timed region
        _kernels.sectional_batch_numba(R, np.eye(n)[:1], np.eye(n)[1:2])
        _kernels.frame_sectional_numba(R, np.eye(n)[None])
        for count in args.sizes:
            P = random_planes(0, count, n)
            U, V = np.ascontiguousarray(P[:, 0]), np.ascontiguousarray(P[:, 1])
            t_np, a = best_of(lambda: _kernels.sectional_batch_numpy(R, U, V), args.repeat)
            t_nb, b = best_of(lambda: _kernels.sectional_batch_numba(R, U, V), args.repeat)
            diff = float(np.max(np.abs(a - b)))
            print(f"{'sectional':<16}{n:>3}{count:>10}{t_np:>11.4f}{t_nb:>11.4f}{t_np / t_nb:>9.2f}{diff:>11.1e}")

            nf = max(1, count // n)
            Q = random_frames(0, nf, n)
            t_np, a = best_of(lambda: _kernels.frame_sectional_numpy(R, Q), args.repeat)
            t_nb, b = best_of(lambda: _kernels.frame_sectional_numba(R, Q), args.repeat)
            idx = np.arange(n)
            a[:, idx, idx] = 0.0
            diff = float(np.max(np.abs(a - b)))
            print(f"{'frame_sectional':<16}{n:>3}{nf:>10}{t_np:>11.4f}{t_nb:>11.4f}{t_np / t_nb:>9.2f}{diff:>11.1e}")


if __name__ == "__main__":
    main()
