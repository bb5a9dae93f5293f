#!/usr/bin/env python3
"""Time the numba kernels against their numpy fallbacks.

Prints a table and, with --json, writes the raw timings.  Each kernel pair is
checked for identical output before timing.
"""

import argparse
import json
import statistics
import sys
import time

import numpy as np

from stiefel_fs import _kernels

REPEATS = 5


def best_of(fn, *args, repeats=REPEATS):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def trapezoid_cases(rng):
    # many short rows (sweep curve areas) and a few long ones
    yield "trapezoid 210x200", (rng.random((210, 200)),)
    yield "trapezoid 10x100000", (rng.random((10, 100_000)),)


def knn_cases(rng):
    for d, n, m, k in ((19, 1617, 693, 5), (60, 420, 180, 5), (256, 1405, 602, 7)):
        x_train = rng.standard_normal((d, n))
        x_test = rng.standard_normal((d, m))
        labels = rng.integers(0, k, n)
        yield f"knn d={d} n={n} m={m}", (x_train, labels, x_test, 5, k)


def run(seed):
    if not _kernels.HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(seed)
    pairs = [
        (trapezoid_cases(rng), _kernels.trapezoid_rows_numba, _kernels.trapezoid_rows_numpy),
        (knn_cases(rng), _kernels.knn_vote_numba, _kernels.knn_vote_numpy),
    ]
    rows = []
    for cases, fast, ref in pairs:
        for name, args in cases:
            t0 = time.perf_counter()
            a = fast(*args)  # first call includes compilation or cache load
            warm = time.perf_counter() - t0
            b = ref(*args)
            if not np.allclose(a, b, rtol=1e-12, atol=1e-12):
                sys.exit(f"{name}: numba and numpy outputs differ")
            nb_min, nb_med = best_of(fast, *args)
            np_min, np_med = best_of(ref, *args)
            rows.append({
                "case": name,
                "numba_first_call_s": warm,
                "numba_min_s": nb_min,
                "numba_median_s": nb_med,
                "numpy_min_s": np_min,
                "numpy_median_s": np_med,
                "speedup": np_min / nb_min if nb_min > 0 else float("inf"),
            })
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", metavar="PATH", help="write timings as JSON")
    args = ap.parse_args(argv)

    rows = run(args.seed)
    print(f"{'case':32s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for r in rows:
        print(f"{r['case']:32s} {1e3 * r['numba_min_s']:10.3f} {1e3 * r['numpy_min_s']:10.3f} {r['speedup']:8.2f}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"seed": args.seed, "repeats": REPEATS, "results": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
