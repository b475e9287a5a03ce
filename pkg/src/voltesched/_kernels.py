"""Hot inner loop of the greedy per-TTI scheduler.

Two interchangeable implementations of the same algorithm: a scalar loop
compiled with numba (default) and a vectorized pure-numpy path.  Set
VOLTESCHED_NO_NUMBA=1 in the environment to force the numpy path; both
return bit-identical results (see tests/test_heuristic.py).

Kernel contract, per TTI:
  B          (N, U+K) int64 deliverable bits per PRB per user
  remaining  (U,) bool, voice users not yet served this frame
  mode       0 = max-throughput, 1 = proportional fair, 2 = strict-priority
             baseline (failed voice bundles waste the PRB)
  pf_avg     (K,) float64 smoothed average rates (used by mode 1)
  strict     replicate the published pseudocode verbatim, including its
             off-by-one band check and <=300 accumulation
returns (assign, served, data_bits, ops):
  assign     (N,) int64, user index owning each PRB, -1 = unallocated
  served     (U,) bool, voice users newly served in this TTI
  data_bits  (K,) int64 bits delivered per data user
  ops        int64 instrumented operation count (argmax candidates scanned
             plus bundle extensions), identical across both paths
"""

from __future__ import annotations

import os

import numpy as np

VOICE_BITS = 300

MODE_MAX_THROUGHPUT = 0
MODE_PF = 1
MODE_BASELINE = 2


def _heuristic_core(B, remaining, mode, pf_avg, strict):  # pragma: no cover - jitted
    n_prb, n_users = B.shape
    n_volte = remaining.shape[0]
    n_data = n_users - n_volte

    assign = np.full(n_prb, -1, dtype=np.int64)
    served = np.zeros(n_volte, dtype=np.bool_)
    data_bits = np.zeros(n_data, dtype=np.int64)
    ops = 0

    rem_count = 0
    for u in range(n_volte):
        if remaining[u]:
            rem_count += 1

    n = 0
    while n < n_prb:
        voice_failed = False
        if rem_count > 0:
            u_star = -1
            best = np.int64(-1)
            for u in range(n_volte):
                if remaining[u]:
                    ops += 1
                    if B[n, u] > best:
                        best = B[n, u]
                        u_star = u
            if strict:
                d = B[n, u_star]
                npr = 1
                ops += 1
                while d <= VOICE_BITS and n + npr < n_prb:
                    d += B[n + npr, u_star]
                    npr += 1
                    ops += 1
                success = n + npr < n_prb
            else:
                d = np.int64(0)
                npr = 0
                while d < VOICE_BITS and n + npr <= n_prb - 1:
                    d += B[n + npr, u_star]
                    npr += 1
                    ops += 1
                success = d >= VOICE_BITS
            if success:
                for i in range(npr):
                    assign[n + i] = u_star
                remaining[u_star] = False
                served[u_star] = True
                rem_count -= 1
                n += npr
                continue
            voice_failed = True

        # PRB n goes to a data user (or is wasted by the baseline when the
        # leftover band could not fit a voice packet).
        if voice_failed and mode == MODE_BASELINE:
            n += 1
            continue
        if n_data > 0:
            k_star = 0
            if mode == MODE_PF:
                best_w = -1.0
                for k in range(n_data):
                    ops += 1
                    w = B[n, n_volte + k] / pf_avg[k]
                    if w > best_w:
                        best_w = w
                        k_star = k
            else:
                best_b = np.int64(-1)
                for k in range(n_data):
                    ops += 1
                    if B[n, n_volte + k] > best_b:
                        best_b = B[n, n_volte + k]
                        k_star = k
            assign[n] = n_volte + k_star
            data_bits[k_star] += B[n, n_volte + k_star]
        n += 1

    return assign, served, data_bits, ops


def heuristic_tti_numpy(B, remaining, mode, pf_avg, strict=False):
    """Vectorized pure-numpy implementation of the kernel contract."""
    B = np.ascontiguousarray(B, dtype=np.int64)
    remaining = remaining.copy()
    n_prb, n_users = B.shape
    n_volte = remaining.shape[0]
    n_data = n_users - n_volte

    assign = np.full(n_prb, -1, dtype=np.int64)
    served = np.zeros(n_volte, dtype=bool)
    data_bits = np.zeros(n_data, dtype=np.int64)
    ops = 0
    rem_count = int(remaining.sum())

    n = 0
    while n < n_prb:
        voice_failed = False
        if rem_count > 0:
            masked = np.where(remaining, B[n, :n_volte], -1)
            u_star = int(np.argmax(masked))
            ops += rem_count
            cs = np.cumsum(B[n:, u_star])
            if strict:
                pos = int(np.searchsorted(cs, VOICE_BITS, side="right"))
                npr = min(pos + 1, n_prb - n)
                success = n + npr < n_prb
            else:
                pos = int(np.searchsorted(cs, VOICE_BITS, side="left"))
                npr = min(pos + 1, n_prb - n)
                success = pos < n_prb - n
            ops += npr
            if success:
                assign[n : n + npr] = u_star
                remaining[u_star] = False
                served[u_star] = True
                rem_count -= 1
                n += npr
                continue
            voice_failed = True

        if voice_failed and mode == MODE_BASELINE:
            n += 1
            continue
        if n_data > 0:
            row = B[n, n_volte:]
            if mode == MODE_PF:
                k_star = int(np.argmax(row / pf_avg))
            else:
                k_star = int(np.argmax(row))
            ops += n_data
            assign[n] = n_volte + k_star
            data_bits[k_star] += row[k_star]
        n += 1

    return assign, served, data_bits, ops


def _build_numba_kernel():
    from numba import njit

    jitted = njit(cache=True)(_heuristic_core)

    def run(B, remaining, mode, pf_avg, strict=False):
        return jitted(
            np.ascontiguousarray(B, dtype=np.int64),
            remaining.copy(),
            np.int64(mode),
            np.asarray(pf_avg, dtype=np.float64),
            bool(strict),
        )

    return run


NUMBA_DISABLED = os.environ.get("VOLTESCHED_NO_NUMBA", "") not in ("", "0")

if NUMBA_DISABLED:
    heuristic_tti_kernel = heuristic_tti_numpy
    USING_NUMBA = False
else:
    try:
        heuristic_tti_kernel = _build_numba_kernel()
        USING_NUMBA = True
    except ImportError:
        heuristic_tti_kernel = heuristic_tti_numpy
        USING_NUMBA = False
