"""Time the compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Prints one line per
kernel and problem size with the median time of each backend.
"""

import argparse
import timeit

import numpy as np

from hyperproto import _kernels_py
from hyperproto.prototypes import build_triplets

try:
    from hyperproto import _ckernels
except ImportError:
    _ckernels = None


def unit_rows(K, D, seed):
    P = np.random.default_rng(seed).standard_normal((K, D))
    return np.ascontiguousarray(P / np.linalg.norm(P, axis=1, keepdims=True))


def median_time(fn, repeat):
    return float(np.median(timeit.repeat(fn, number=1, repeat=repeat)))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=7)
    args = parser.parse_args()
    backends = [("python", _kernels_py)] + ([("cython", _ckernels)] if _ckernels else [])
    if _ckernels is None:
        print("compiled extension not built; timing the numpy fallback only")

    for K in (30, 100):
        P = unit_rows(K, 50, 0)
        C = np.ascontiguousarray(P @ P.T)
        T = build_triplets(K)
        sbar = (np.random.default_rng(1).random(len(T)) < 0.5).astype(np.float64)
        times = {name: median_time(lambda m=m: m.rank_accumulate(C, T, sbar), args.repeat)
                 for name, m in backends}
        print(f"rank_accumulate K={K} triplets={len(T)}: "
              + "  ".join(f"{n}={t * 1e3:.2f}ms" for n, t in times.items()), _speedup(times))

    for K in (100, 1000):
        P = unit_rows(K, 100, 2)
        M = np.ascontiguousarray(P @ P.T - 2 * np.eye(K))
        times = {name: median_time(lambda m=m: m.rowmax_scatter(M, P, False), args.repeat)
                 for name, m in backends}
        print(f"rowmax_scatter K={K} D=100: "
              + "  ".join(f"{n}={t * 1e3:.2f}ms" for n, t in times.items()), _speedup(times))


def _speedup(times):
    if "cython" not in times:
        return ""
    return f"speedup={times['python'] / times['cython']:.1f}x"


if __name__ == "__main__":
    main()
