"""Time the numba kernels against the numpy/LAPACK fallback.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat N]``. The fallback can
also be forced package-wide with ``ORLICZLAB_DISABLE_NUMBA=1``.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from orliczlab import _kernels as K


def _ou_operator(n=4097, R=12.0):
    x = np.linspace(-R, R, n)
    h = x[1] - x[0]
    drift = -x
    sub = 1 / h**2 - drift / (2 * h)
    sup = 1 / h**2 + drift / (2 * h)
    diag = -2 / h**2 + 0 * x
    sub[0] = 0.0
    sup[-1] = 0.0
    return sub, diag, sup, np.tanh(x)


def _best(fn, repeat):
    fn()  # warm-up (and JIT compile)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    sub, diag, sup, u0 = _ou_operator()
    xs = np.linspace(0.0, 10.0, 2001)
    y, dy = np.sin(xs), np.cos(xs)
    xq = np.random.default_rng(0).uniform(0.0, 10.0, 200_000)
    cases = {
        "theta_march n=4097 steps=1024": lambda u: K.theta_march(sub, diag, sup, u0, 1e-3, 1024, use_numba=u),
        "hermite_uniform 2e5 queries": lambda u: K.hermite_uniform(0.0, xs[1] - xs[0], y, dy, xq, use_numba=u),
        "hermite_nonuniform 2e5 queries": lambda u: K.hermite_nonuniform(xs, y, dy, xq, use_numba=u),
    }
    print(f"numba available: {K.HAVE_NUMBA}, enabled by env: {K.numba_enabled()}")
    print(f"{'kernel':34s} {'numba [s]':>10s} {'numpy [s]':>10s} {'max |diff|':>11s}")
    for name, fn in cases.items():
        tn = _best(lambda: fn(True), args.repeat) if K.HAVE_NUMBA else float("nan")
        tp = _best(lambda: fn(False), args.repeat)
        diff = float(np.max(np.abs(fn(True) - fn(False))))
        print(f"{name:34s} {tn:10.4f} {tp:10.4f} {diff:11.2e}")


if __name__ == "__main__":
    main()
