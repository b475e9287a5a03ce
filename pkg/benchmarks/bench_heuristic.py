#!/usr/bin/env python3
"""Benchmark the greedy TTI kernel: compiled (numba) vs pure-numpy path.

Runs both implementations on identical random workloads, checks they agree,
and prints per-TTI timings plus the speedup.  Invoke from the repo root:

    python3 benchmarks/bench_heuristic.py
"""

import argparse
import time

import numpy as np

from voltesched import _kernels

CASES = [
    # (N, U, K) - small cell, mid load, full 10 MHz at saturation load
    (7, 10, 5),
    (15, 50, 5),
    (50, 100, 50),
    (50, 600, 50),
]


def make_workload(rng, n_prb, n_volte, n_data, n_tti):
    ttis = []
    for _ in range(n_tti):
        B = rng.integers(0, 700, size=(n_prb, n_volte + n_data))
        remaining = rng.random(n_volte) < 0.5
        pf_avg = rng.uniform(0.5, 20.0, size=n_data)
        ttis.append((B, remaining, pf_avg))
    return ttis


def run(kernel, ttis, mode):
    t0 = time.perf_counter()
    out = [kernel(B, rem.copy(), mode, pf, False) for B, rem, pf in ttis]
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ttis", type=int, default=200, help="TTIs per case (default 200)")
    ap.add_argument("--mode", type=int, default=0, choices=(0, 1, 2))
    args = ap.parse_args()

    if not _kernels.USING_NUMBA:
        print("numba path unavailable (VOLTESCHED_NO_NUMBA set or import failed);")
        print("timing the numpy path only.\n")

    rng = np.random.default_rng(0)
    header = f"{'N':>4} {'U':>4} {'K':>4} | {'numpy us/TTI':>13} {'numba us/TTI':>13} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n_prb, n_volte, n_data in CASES:
        ttis = make_workload(rng, n_prb, n_volte, n_data, args.ttis)
        # warm-up (JIT compile + cache effects), then measure
        run(_kernels.heuristic_tti_numpy, ttis[:2], args.mode)
        t_np, out_np = run(_kernels.heuristic_tti_numpy, ttis, args.mode)
        if _kernels.USING_NUMBA:
            run(_kernels.heuristic_tti_kernel, ttis[:2], args.mode)
            t_nb, out_nb = run(_kernels.heuristic_tti_kernel, ttis, args.mode)
            for a, b in zip(out_np, out_nb):
                for x, y in zip(a, b):
                    assert np.array_equal(x, y), "kernel outputs diverged"
            speed = f"{t_np / t_nb:7.1f}x"
            nb_us = f"{t_nb / args.ttis * 1e6:13.1f}"
        else:
            speed, nb_us = f"{'-':>8}", f"{'-':>13}"
        print(f"{n_prb:>4} {n_volte:>4} {n_data:>4} | {t_np / args.ttis * 1e6:13.1f} {nb_us} {speed}")


if __name__ == "__main__":
    main()
