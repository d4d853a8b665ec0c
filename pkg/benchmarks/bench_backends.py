"""Benchmark the compiled kernel backend against the numpy fallback.

Times the three hot kernels on workloads shaped like a [[72,12,6]]
memory experiment: signature scatter during sampling, min-sum BP
iterations, and packed GF(2) elimination for OSD.

Run:  python3 benchmarks/bench_backends.py [--repeat N]
"""

import argparse
import time

import numpy as np

from gbmem._kernels import pyfallback

try:
    from gbmem._kernels import _core
except ImportError:
    _core = None


def _timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def scatter_workload(rng):
    shots, words, n_mech, hits = 100000, 8, 16000, 500000
    buf = np.zeros((shots, words), dtype=np.uint64)
    rows = rng.integers(0, 2 ** 63, (n_mech, words), dtype=np.uint64)
    shot_idx = rng.integers(0, shots, hits).astype(np.int64)
    mech_idx = rng.integers(0, n_mech, hits).astype(np.int64)
    return lambda k: k.scatter_xor(buf, shot_idx, rows, mech_idx), hits


def bp_workload(rng):
    # random (432, 2200) sparse check matrix, column weight 4
    m, n, cw = 432, 2200, 4
    cols = np.repeat(np.arange(n), cw)
    rows = np.concatenate([rng.choice(m, cw, replace=False) for _ in range(n)])
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    row_ptr = np.searchsorted(rows, np.arange(m + 1)).astype(np.int64)
    col_idx = cols.astype(np.int32)
    csc = np.lexsort((rows, cols))
    col_ptr = np.searchsorted(cols[csc], np.arange(n + 1)).astype(np.int64)
    # edge_rm maps row-major edge e to its CSC slot
    edge_rm = np.empty(len(csc), dtype=np.int64)
    edge_rm[csc] = np.arange(len(csc))
    llr = np.full(n, 6.0)
    syndrome = (rng.random(m) < 0.1).astype(np.uint8)
    iters = 30

    def run(k):
        post = np.empty(n)
        hard = np.empty(n, dtype=np.uint8)
        k.bp_min_sum(row_ptr, col_idx, col_ptr, edge_rm, llr, syndrome,
                     iters, 1.0, post, hard)

    return run, iters * len(cols)


def rref_workload(rng):
    rows, cols = 252, 2232
    words = (cols + 63) // 64
    mat = rng.integers(0, 2 ** 63, (rows, words), dtype=np.uint64)
    order = rng.permutation(cols).astype(np.int64)

    def run(k):
        k.gf2_rref_packed(mat.copy(), order)

    return run, rows * cols


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5,
                    help="timing repetitions, best is reported")
    args = ap.parse_args()

    if _core is None:
        print("compiled backend not built; showing fallback only")
    backends = [("fallback", pyfallback)]
    if _core is not None:
        backends.append(("compiled", _core))

    rng = np.random.default_rng(0)
    workloads = [
        ("scatter_xor", *scatter_workload(rng), "hits/s"),
        ("bp_min_sum", *bp_workload(rng), "edge-updates/s"),
        ("gf2_rref_packed", *rref_workload(rng), "cells/s"),
    ]

    print(f"{'kernel':<18}{'backend':<10}{'best':>10}  rate")
    base = {}
    for name, make, ops, unit in workloads:
        for bname, mod in backends:
            t = _timeit(lambda: make(mod), args.repeat)
            rate = ops / t
            note = ""
            if bname == "fallback":
                base[name] = t
            elif name in base:
                note = f"  ({base[name] / t:.1f}x faster)"
            print(f"{name:<18}{bname:<10}{t * 1e3:>8.2f}ms  "
                  f"{rate:,.0f} {unit}{note}")


if __name__ == "__main__":
    main()
