"""Timing comparison of the compiled kernels against the pure-Python ones.

Run:  python3 benchmarks/bench_kernels.py [--n 1000000] [--m 8] [--repeat 3]

Covers the three kernels behind graph construction (endpoint resolution,
right-neighbor CSR assembly, compensated prefix sums) plus end-to-end
generation on each backend.  Results from both backends are checked for
agreement before timing.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from pasearch._kernels import _fallback
from pasearch.generator import generate_sequential
from pasearch.rng import STREAM_SEQUENTIAL, stream_rng

try:
    from pasearch._kernels import _ext
except ImportError:
    _ext = None


def best_of(repeat, fn, *args):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--m", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    n, m = args.n, args.m
    mn = n * m

    rng = stream_rng(args.seed, STREAM_SEQUENTIAL)
    highs = np.arange(1, mn + 1, dtype=np.uint32)
    np.multiply(highs, 2, out=highs)
    draws = rng.integers(1, highs, dtype=np.uint32, endpoint=False)
    xi = np.random.default_rng(args.seed).standard_exponential(mn + 1)

    backends = [("python", _fallback)]
    if _ext is not None:
        backends.insert(0, ("ext", _ext))
    else:
        print("compiled extension not available; timing fallback only")

    print(f"n={n} m={m} edges={mn}")
    results = {}
    for name, mod in backends:
        t_resolve, left = best_of(args.repeat, mod.resolve_left_choices, draws, m)
        t_csr, csr = best_of(args.repeat, mod.build_right_csr, left, n, m)
        t_cumsum, sums = best_of(args.repeat, mod.compensated_cumsum, xi)
        results[name] = (left, csr, sums)
        print(
            f"[{name:6s}] resolve: {t_resolve:8.3f}s   "
            f"csr: {t_csr:8.3f}s   cumsum: {t_cumsum:8.3f}s"
        )

    if len(results) == 2:
        left_a, csr_a, sums_a = results["ext"]
        left_b, csr_b, sums_b = results["python"]
        assert np.array_equal(left_a, left_b), "left endpoints differ"
        assert np.array_equal(csr_a[0], csr_b[0]), "CSR indptr differs"
        assert np.array_equal(csr_a[1], csr_b[1]), "CSR owners differ"
        drift = np.max(np.abs(sums_a - sums_b) / np.abs(sums_b))
        print(f"backends agree (cumsum rel drift {drift:.2e})")

    t_gen, _ = best_of(args.repeat, generate_sequential, n, m, args.seed)
    print(f"end-to-end generate_sequential: {t_gen:.3f}s (active backend)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
