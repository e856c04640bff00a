"""Benchmark the numba kernels against the pure-numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Each kernel is timed on a realistic workload with both backends; the numba
path is warmed first so JIT compilation is excluded.
"""

import argparse
import time

import numpy as np

from beamprobe import _kernels_numpy as knp

try:
    from beamprobe import _kernels_numba as knb
except ImportError:
    knb = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(name, make_args, call, repeats):
    args = make_args()
    rows = []
    if knb is not None:
        call(knb, *args)  # warm the JIT
        rows.append(("numba", timeit(lambda: call(knb, *args), repeats)))
    rows.append(("numpy", timeit(lambda: call(knp, *args), repeats)))
    base = rows[-1][1]
    print(f"\n{name}")
    for backend, seconds in rows:
        speedup = base / seconds if seconds > 0 else float("inf")
        print(f"  {backend:<6} {seconds * 1e3:9.2f} ms   x{speedup:.1f} vs numpy")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    def lev_args():
        a = rng.integers(0, 500, size=400).astype(np.int64)
        b = rng.integers(0, 500, size=400).astype(np.int64)
        return a, b

    bench(
        "levenshtein_costs, one 400x400 token pair",
        lev_args,
        lambda impl, a, b: impl.levenshtein_costs(a, b),
        args.repeats,
    )

    def lev_many_args():
        pairs = [
            (
                rng.integers(0, 60, size=int(rng.integers(20, 60))).astype(np.int64),
                rng.integers(0, 60, size=int(rng.integers(20, 60))).astype(np.int64),
            )
            for _ in range(500)
        ]
        return (pairs,)

    bench(
        "edit_distance, 500 short utterance pairs",
        lev_many_args,
        lambda impl, pairs: [impl.edit_distance(a, b) for a, b in pairs],
        args.repeats,
    )

    def affinity_args():
        x = rng.normal(size=(400, 30))
        d2 = knp.pairwise_sq_distances(x)
        return (d2,)

    bench(
        "gaussian_conditional_probs, 400 points, perplexity 20",
        affinity_args,
        lambda impl, d2: impl.gaussian_conditional_probs(d2, 20.0),
        args.repeats,
    )

    def tsne_args():
        n = 400
        p = np.abs(rng.normal(size=(n, n)))
        p = (p + p.T) / 2
        np.fill_diagonal(p, 0.0)
        p /= p.sum()
        y = rng.normal(size=(n, 2))
        return p, y

    bench(
        "tsne_kl_grad, 400 points",
        tsne_args,
        lambda impl, p, y: impl.tsne_kl_grad(p, y),
        args.repeats,
    )

    def perm_args():
        x = rng.normal(size=20)
        y = rng.normal(size=20)
        xc, yc = x - x.mean(), y - y.mean()
        denom = float(np.linalg.norm(xc) * np.linalg.norm(yc))
        return xc, yc, denom

    bench(
        "perm_abs_exceed_count, 10000 permutations of 20 values",
        perm_args,
        lambda impl, xc, yc, denom: impl.perm_abs_exceed_count(xc, yc, 0.4, denom, 10000, 7),
        args.repeats,
    )


if __name__ == "__main__":
    main()
