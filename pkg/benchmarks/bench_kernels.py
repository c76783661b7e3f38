"""Benchmark the compiled kernels against the pure-Python fallback.

Run with:  python3 benchmarks/bench_kernels.py

Reports wall-clock timings for the tree split search and both SGD loops on
representative problem sizes, plus the speedup factor. Requires the compiled
extension to be built; otherwise only the fallback is timed.
"""

import time

import numpy as np

from threatgraph import kernels
from threatgraph.kernels import fallback


def timeit(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_gini(rng, n=500, d=60):
    X = np.ascontiguousarray(rng.normal(size=(n, d)))
    y = rng.integers(0, 2, size=n).astype(np.int64)
    rows = np.arange(n, dtype=np.int64)
    feats = np.arange(d, dtype=np.int64)
    return [
        ("best_gini_split", f"{n}x{d}", impl, timeit(lambda: mod.best_gini_split(X, y, rows, feats)))
        for impl, mod in impls()
    ]


def bench_logistic(rng, n=300, d=80, epochs=200):
    X = np.ascontiguousarray(rng.normal(size=(n, d)))
    y01 = rng.integers(0, 2, size=n).astype(np.float64)
    order = np.vstack([rng.permutation(n) for _ in range(epochs)]).astype(np.int64)
    return [
        (
            "logistic_sgd_epochs",
            f"{n}x{d}x{epochs}ep",
            impl,
            timeit(lambda: mod.logistic_sgd_epochs(X, y01, order, 1e-3, 1e-4)),
        )
        for impl, mod in impls()
    ]


def bench_hinge(rng, n=300, d=80, epochs=200):
    X = np.ascontiguousarray(rng.normal(size=(n, d)))
    ypm = (2.0 * rng.integers(0, 2, size=n) - 1.0).astype(np.float64)
    order = np.vstack([rng.permutation(n) for _ in range(epochs)]).astype(np.int64)
    return [
        (
            "hinge_sgd_epochs",
            f"{n}x{d}x{epochs}ep",
            impl,
            timeit(lambda: mod.hinge_sgd_epochs(X, ypm, order, 1e-3, 1e-4)),
        )
        for impl, mod in impls()
    ]


def impls():
    out = [("python", fallback)]
    if kernels.IMPLEMENTATION == "compiled":
        out.insert(0, ("compiled", kernels))
    return out


def main():
    print(f"active implementation: {kernels.IMPLEMENTATION}")
    rng = np.random.default_rng(0)
    rows = bench_gini(rng) + bench_logistic(rng) + bench_hinge(rng)
    print(f"{'kernel':<22} {'size':<14} {'impl':<9} {'seconds':>10}")
    by_kernel = {}
    for name, size, impl, seconds in rows:
        print(f"{name:<22} {size:<14} {impl:<9} {seconds:>10.4f}")
        by_kernel.setdefault(name, {})[impl] = seconds
    for name, timings in by_kernel.items():
        if "compiled" in timings and "python" in timings:
            print(f"{name}: compiled is {timings['python'] / timings['compiled']:.1f}x faster")


if __name__ == "__main__":
    main()
