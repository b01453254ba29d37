"""Time the numpy and numba kernel backends on quadrature-sized inputs.

    python3 benchmarks/bench_kernels.py [--size 200000] [--repeat 5]

The first numba call includes JIT compilation; it is reported separately
and excluded from the steady-state timings.
"""

import argparse
import time

import numpy as np

from twinpeaks import _kernels


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def make_inputs(size, rng):
    n = 6
    x = rng.normal(size=size) * 10
    r = np.abs(rng.normal(size=size)) * 10
    w = rng.uniform(size=size)
    pts = rng.normal(size=(size, n))
    c1, c2 = np.zeros(n), np.eye(n)[0] * 20.0
    return {
        "axial_sum": (x, r, w, n, 1.0, 1.0, 20.0, _kernels.MODE_DLAMBDA1, 0.0, 0.0),
        "pair_power": (pts, c1, 1.0, c2, 1.0, n, 2 * n / (n - 2)),
        "bracket": (np.abs(rng.normal(size=size)), np.abs(rng.normal(size=size)), (n + 2) / (n - 2)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    inputs = make_inputs(args.size, np.random.default_rng(0))
    backends = list(_kernels.IMPLEMENTATIONS)
    print(f"active backend: {_kernels.BACKEND}; available: {', '.join(backends)}; size {args.size}")
    print(f"{'kernel':<12}{'backend':<8}{'first call [s]':>16}{'best [s]':>12}{'speedup':>10}{'max rel diff':>14}")
    for name, kargs in inputs.items():
        ref_time, ref = None, None
        for backend in backends:
            fn = _kernels.IMPLEMENTATIONS[backend][name]
            t0 = time.perf_counter()
            fn(*kargs)
            first = time.perf_counter() - t0
            best, out = best_of(fn, kargs, args.repeat)
            if ref is None:
                ref_time, ref = best, np.asarray(out, dtype=float)
            diff = np.max(np.abs(np.asarray(out, dtype=float) - ref) / np.maximum(np.abs(ref), 1e-300))
            print(f"{name:<12}{backend:<8}{first:>16.4f}{best:>12.4f}{ref_time / best:>10.2f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
