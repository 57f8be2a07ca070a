"""Time the compiled propagation kernels against their numpy counterparts.

Usage::

    python benchmarks/bench_kernels.py [--points 12] [--dim 2] [--repeat 200]

Each kernel runs on the same random boxes. With numba disabled
(``MINDC_NUMBA=0``) only the numpy column is reported.
"""

import argparse
import itertools
import time

import numpy as np

from mindc import kernels
from mindc.geometry import EPS_GEOM
from mindc.single import EPS_BOUND


def all_pairs(n, dim):
    """Index arrays for a pairwise distance constraint between ``n`` points."""
    pairs = list(itertools.combinations(range(n), 2))
    Y = np.array([[i * dim + k for k in range(dim)] for i, _ in pairs], dtype=np.int64)
    Z = np.array([[j * dim + k for k in range(dim)] for _, j in pairs], dtype=np.int64)
    return Y, Z


def random_boxes(rng, nvars, count):
    lo = rng.uniform(-1.0, 1.0, (count, nvars))
    hi = lo + rng.uniform(0.0, 0.8, (count, nvars))
    return lo, hi


def time_sweep(fn, boxes, extra):
    lo_all, hi_all = boxes
    start = time.perf_counter()
    for lo, hi in zip(lo_all, hi_all):
        fn(lo.copy(), hi.copy(), *extra)
    return time.perf_counter() - start


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=12)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    nvars = args.points * args.dim
    Y, Z = all_pairs(args.points, args.dim)
    m = len(Y)
    dconst = np.full(m, 0.6)
    dvar = np.full(m, -1, dtype=np.int64)
    mask = np.ones(nvars, dtype=bool)
    boxes = random_boxes(rng, nvars, args.repeat)

    P = rng.uniform(-1, 1, (2 ** args.dim, args.dim)) + 1.5
    Q = rng.uniform(-1, 1, (2 ** args.dim, args.dim)) - 1.5
    cover_boxes = random_boxes(rng, args.dim, args.repeat)

    cases = {
        "prop1": (boxes, (Y, Z, dconst, dvar, True, EPS_BOUND, mask)),
        "locatelli": (boxes, (Y, Z, dconst, dvar, EPS_BOUND, EPS_GEOM, mask)),
        "cover": (cover_boxes, (P, Q, 2.0, 2.0, EPS_GEOM)),
    }
    active = {"prop1": kernels.prop1_sweep, "locatelli": kernels.locatelli_sweep,
              "cover": kernels.cover_check}

    print(f"backend={kernels.BACKEND} points={args.points} dim={args.dim} "
          f"constraints={m} boxes={args.repeat}")
    print(f"{'kernel':<10} {'numpy [ms]':>11} {'active [ms]':>12} {'speedup':>8}")
    for name, (bx, extra) in cases.items():
        fast = active[name]
        fast(bx[0][0].copy(), bx[1][0].copy(), *extra)  # compile outside the timing
        t_np = time_sweep(kernels.NUMPY_KERNELS[name], bx, extra)
        t_act = time_sweep(fast, bx, extra)
        print(f"{name:<10} {1e3 * t_np:>11.2f} {1e3 * t_act:>12.2f} {t_np / t_act:>8.1f}")


if __name__ == "__main__":
    main()
