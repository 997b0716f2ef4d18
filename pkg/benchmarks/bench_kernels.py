"""Compiled vs pure-Python kernel timings.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from corrsop import _kernels_py

try:
    from corrsop import _kernels
except ImportError:
    _kernels = None


def _marcum_inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.0, 20.0, n)
    b = rng.uniform(0.0, 20.0, n)
    return a, b


def _outage_inputs(n, M=3, N_t=2, N_E=2, seed=0):
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((n, N_t, 1 + M + N_E, 2)) * np.sqrt(0.5)
    eta = np.array([0.6, -0.7, 0.8])[:M]
    lam = 0.5
    return (draws, np.sqrt(1 - eta ** 2), eta, np.sqrt(1 - lam ** 2), lam, 1000.0, 3.0, 2.0)


def bench(label, fn, repeat):
    t = min(timeit.repeat(fn, number=1, repeat=repeat))
    print(f"  {label:<8s} {t * 1e3:10.2f} ms")
    return t


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n-marcum", type=int, default=20000)
    ap.add_argument("--n-trials", type=int, default=65536)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the pure-Python backend is available")

    a, b = _marcum_inputs(args.n_marcum)
    print(f"marcum_qp, M=3, {args.n_marcum} points")
    tp = bench("python", lambda: _kernels_py.marcum_qp(3, a, b, 1e-13, 10000), args.repeat)
    if _kernels is not None:
        tc = bench("cython", lambda: _kernels.marcum_qp(3, a, b, 1e-13, 10000), args.repeat)
        qp, _, _ = _kernels_py.marcum_qp(3, a, b, 1e-13, 10000)
        qc, _, _ = _kernels.marcum_qp(3, a, b, 1e-13, 10000)
        print(f"  speedup  {tp / tc:10.1f}x   max |diff| {np.max(np.abs(qp - qc)):.2e}")

    args_o = _outage_inputs(args.n_trials)
    print(f"count_outages, M=3, N_t=2, N_E=2, {args.n_trials} trials")
    tp = bench("python", lambda: _kernels_py.count_outages(*args_o), args.repeat)
    if _kernels is not None:
        tc = bench("cython", lambda: _kernels.count_outages(*args_o), args.repeat)
        same = np.array_equal(_kernels_py.count_outages(*args_o), _kernels.count_outages(*args_o))
        print(f"  speedup  {tp / tc:10.1f}x   identical counts: {same}")


if __name__ == "__main__":
    main()
