"""Compare the compiled and pure-Python kernel backends.

Run after an editable install::

    python3 benchmarks/bench_kernels.py [--pairs 20000] [--repeat 3]

Reports the best wall time per backend, the speed-up, and the largest
relative difference between the two backends' outputs.
"""
import argparse
import timeit

import numpy as np

from langspace import _kernels_py, kernels, metrics
from langspace.fixtures import generate_catalog

try:
    from langspace import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def _with_backend(impl, fn):
    saved = kernels.geodesic_pairs, kernels.prefix_pairs
    kernels.geodesic_pairs, kernels.prefix_pairs = impl.geodesic_pairs, impl.prefix_pairs
    try:
        return fn()
    finally:
        kernels.geodesic_pairs, kernels.prefix_pairs = saved


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=20000)
    ap.add_argument("--languages", type=int, default=120)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if _kernels_c is None:
        print("compiled extension not built; nothing to compare")
        return 1

    rng = np.random.default_rng(args.seed)
    n = args.pairs
    lat1, lat2 = rng.uniform(-89, 89, (2, n))
    lon1, lon2 = rng.uniform(-180, 180, (2, n))
    depth = 12
    codes = rng.integers(0, 3, (500, depth)).astype(np.int32)
    codes = np.cumsum(codes, axis=1).astype(np.int32)
    lengths = rng.integers(1, depth + 1, 500).astype(np.int32)
    ia, ib = rng.integers(0, 500, (2, n))
    cat = generate_catalog(args.languages, seed=args.seed)

    cases = {
        f"geodesic_pairs ({n} pairs)": lambda impl: impl.geodesic_pairs(lat1, lon1, lat2, lon2),
        f"prefix_pairs ({n} pairs)": lambda impl: impl.prefix_pairs(codes, lengths, ia, ib),
        f"pairwise_metrics ({args.languages} languages)":
            lambda impl: _with_backend(impl, lambda: metrics.pairwise_metrics(cat)),
    }
    print(f"{'kernel':<36} {'python s':>10} {'cython s':>10} {'speed-up':>9}  {'max rel diff':>12}")
    for name, call in cases.items():
        a = np.asarray(call(_kernels_py), dtype=np.float64)
        b = np.asarray(call(_kernels_c), dtype=np.float64)
        diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
        t_py = _best(lambda: call(_kernels_py), args.repeat)
        t_c = _best(lambda: call(_kernels_c), args.repeat)
        print(f"{name:<36} {t_py:>10.4f} {t_c:>10.4f} {t_py / t_c:>8.1f}x  {diff:>12.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
