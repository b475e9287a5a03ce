"""Scheduling policies for mixed voice / best-effort downlink traffic.

Six policies share one frame orchestrator:

  frame_optimal    one 0/1 program over the whole 20-TTI frame (voice users
                   served exactly once each); infeasible frames are a
                   reportable outcome, not an error
  tti_optimal      per TTI: phase 1 maximizes the number of voice users
                   served, phase 2 maximizes data throughput given phase 1
  tti_optimal_pf   phase 2 weighted by 1 / smoothed average rate
  heuristic        greedy PRB scan (max-throughput data rule)
  heuristic_pf     greedy PRB scan (proportional-fair data rule)
  baseline         greedy with strict voice priority: PRBs that cannot fit
                   a voice packet are wasted
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .bip import BinaryProgram, SolveOutcome, solve_branch_and_bound, solve_lp_relaxation
from .ratemap import VOICE_PACKET_BITS, VOICE_PAYLOAD_BITS

FRAME_TTIS = 20

POLICIES = (
    "frame_optimal",
    "tti_optimal",
    "tti_optimal_pf",
    "heuristic",
    "heuristic_pf",
    "baseline",
)

_KERNEL_MODE = {
    "heuristic": _kernels.MODE_MAX_THROUGHPUT,
    "heuristic_pf": _kernels.MODE_PF,
    "baseline": _kernels.MODE_BASELINE,
}


@dataclass
class TtiAllocation:
    """PRB ownership for one TTI.

    x[n][u] = 1 iff PRB n belongs to user u; y flags voice users served in
    this TTI; data_bits_per_user counts bits delivered to each data user.
    """

    x: np.ndarray  # (N, U+K) int8
    y: np.ndarray  # (U,) int8
    data_bits_per_user: np.ndarray  # (K,) int64
    volte_served: list[int]
    ops: int = 0

    @property
    def data_bits(self) -> int:
        return int(self.data_bits_per_user.sum())


@dataclass
class FrameAllocation:
    per_tti: list[TtiAllocation]
    user_bits: np.ndarray  # (U+K,) bits delivered over the frame

    def to_csv(self, path, B: np.ndarray | None = None) -> None:
        """Dump (tti, prb, user, bits) rows for inspection / golden files."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tti", "prb", "user", "bits"])
            for t, tti in enumerate(self.per_tti):
                owner = np.argmax(tti.x, axis=1)
                used = tti.x.sum(axis=1) > 0
                for n in range(tti.x.shape[0]):
                    if used[n]:
                        u = int(owner[n])
                        bits = int(B[n, u]) if B is not None else ""
                        w.writerow([t, n, u, bits])


@dataclass
class SchedulerState:
    """Per-frame bookkeeping carried across TTIs (and PF averages across frames)."""

    num_volte: int
    num_data: int
    gamma: float = 0.9
    remaining_volte: set[int] = field(default_factory=set)
    c_volte: int = 0
    c_data: int = 0
    pf_avg: np.ndarray = None  # (K,) smoothed average rates, > 0 always
    frame_status: str = "ok"  # "ok" | "infeasible" | "timeout"
    ops: int = 0

    def __post_init__(self):
        if not self.remaining_volte:
            self.remaining_volte = set(range(self.num_volte))
        if self.pf_avg is None:
            self.pf_avg = np.ones(self.num_data)

    def update_pf(self, tti_data_bits: np.ndarray) -> None:
        """Smoothed-average update A <- gamma*A + (1-gamma)*C at TTI end.

        Users not scheduled this TTI have C = 0, so both branches of the
        update collapse to this single expression.
        """
        self.pf_avg = self.gamma * self.pf_avg + (1.0 - self.gamma) * tti_data_bits


# ---------------------------------------------------------------------------
# Program builders


def build_frame_program(B: np.ndarray, U: int, K: int, T: int = FRAME_TTIS) -> BinaryProgram:
    """Frame-level 0/1 program: maximize data bits over the whole frame.

    Variables are x[n,u,t] (PRB n to user u in TTI t) followed by y[u,t]
    (voice user u served in TTI t).  Rows: each PRB owned by exactly one
    user per TTI (at most one when K = 0, so surplus PRBs can go unused),
    each voice user served in exactly one TTI, and served voice users get
    at least 300 bits in that TTI.
    """
    B = np.asarray(B)
    N = B.shape[0]
    nu = U + K
    nx = N * nu * T

    def xi(n, u, t):
        return (t * N + n) * nu + u

    def yi(u, t):
        return nx + t * U + u

    num_vars = nx + U * T
    c = np.zeros(num_vars)
    for t in range(T):
        for n in range(N):
            for k in range(K):
                c[xi(n, U + k, t)] = B[n, U + k]

    eq_rows, ge_rows = [], []
    for t in range(T):
        for n in range(N):
            row = np.zeros(num_vars)
            for u in range(nu):
                row[xi(n, u, t)] = 1.0
            if K >= 1:
                eq_rows.append((row, 1.0))
            else:
                ge_rows.append((-row, -1.0))
    for u in range(U):
        row = np.zeros(num_vars)
        for t in range(T):
            row[yi(u, t)] = 1.0
        eq_rows.append((row, 1.0))
    for t in range(T):
        for u in range(U):
            row = np.zeros(num_vars)
            for n in range(N):
                row[xi(n, u, t)] = B[n, u]
            row[yi(u, t)] = -float(VOICE_PACKET_BITS)
            ge_rows.append((row, 0.0))

    labels = [f"x[prb={n},user={u},tti={t}]" for t in range(T) for n in range(N) for u in range(nu)]
    labels += [f"y[user={u},tti={t}]" for t in range(T) for u in range(U)]
    return BinaryProgram.from_rows(c, eq_rows, ge_rows, labels)


def build_volte_select_program(B: np.ndarray, remaining: list[int]) -> BinaryProgram:
    """Phase-1 program for one TTI: maximize the number of voice users served.

    Only the y outcomes are trusted downstream, so the data users' PRB
    variables (which are pure filler in the full formulation) are dropped
    and the per-PRB ownership rows relaxed to "at most one" -- an exact
    reformulation with identical optimal y.
    """
    B = np.asarray(B)
    N = B.shape[0]
    R = len(remaining)
    nx = N * R

    def xi(n, i):
        return n * R + i

    num_vars = nx + R
    c = np.zeros(num_vars)
    c[nx:] = 1.0

    ge_rows = []
    for n in range(N):
        row = np.zeros(num_vars)
        row[[xi(n, i) for i in range(R)]] = -1.0
        ge_rows.append((row, -1.0))
    for i, u in enumerate(remaining):
        row = np.zeros(num_vars)
        for n in range(N):
            row[xi(n, i)] = B[n, u]
        row[nx + i] = -float(VOICE_PACKET_BITS)
        ge_rows.append((row, 0.0))
    # Valid cardinality rows (serving u takes >= r_u PRBs even using its
    # best ones); redundant for 0/1 points but they tighten the relaxation
    # enormously -- without them the LP covers the packet with fractions of
    # the few best PRBs and the bound barely prunes.
    for i, u in enumerate(remaining):
        row = np.zeros(num_vars)
        row[[xi(n, i) for n in range(N)]] = 1.0
        row[nx + i] = -float(_min_prbs_to_serve(B[:, u]))
        ge_rows.append((row, 0.0))

    labels = [f"x[prb={n},volte={u}]" for n in range(N) for u in remaining]
    labels += [f"y[volte={u}]" for u in remaining]
    return BinaryProgram.from_rows(c, [], ge_rows, labels)


def build_tti_allocate_program(
    B: np.ndarray, U: int, served: list[int], weights: np.ndarray
) -> BinaryProgram:
    """Phase-2 program in opportunity-cost form, one TTI, voice set fixed.

    Every PRB not taken by a served voice user goes to the data user with
    the highest weighted rate on it, so maximizing weighted data bits is
    equivalent to minimizing the weighted rate displaced by voice PRBs.
    Variables are x[n,i] over served voice users only; the full objective is
    recovered as sum_n max_k(w_k B[n,U+k]) plus this program's optimum.
    """
    B = np.asarray(B)
    N = B.shape[0]
    R = len(served)
    cost = _weighted_fill_value(B, U, weights)  # (N,) displaced value per PRB

    def xi(n, i):
        return n * R + i

    num_vars = N * R
    c = np.zeros(num_vars)
    for n in range(N):
        for i in range(R):
            c[xi(n, i)] = -cost[n]

    ge_rows = []
    for n in range(N):
        row = np.zeros(num_vars)
        row[[xi(n, i) for i in range(R)]] = -1.0
        ge_rows.append((row, -1.0))
    for i, u in enumerate(served):
        row = np.zeros(num_vars)
        for n in range(N):
            row[xi(n, i)] = B[n, u]
        ge_rows.append((row, float(VOICE_PACKET_BITS)))
    # Cardinality strengthening; see build_volte_select_program.
    for i, u in enumerate(served):
        row = np.zeros(num_vars)
        row[[xi(n, i) for n in range(N)]] = 1.0
        ge_rows.append((row, float(_min_prbs_to_serve(B[:, u]))))

    labels = [f"x[prb={n},volte={u}]" for n in range(N) for u in served]
    return BinaryProgram.from_rows(c, [], ge_rows, labels)


def _min_prbs_to_serve(b_user: np.ndarray) -> int:
    """Fewest PRBs that can carry a voice packet for this user (N+1 if none)."""
    bs = np.sort(b_user)[::-1]
    total = np.cumsum(bs)
    return int(np.searchsorted(total, VOICE_PACKET_BITS) + 1)


def _weighted_fill_value(B: np.ndarray, U: int, weights) -> np.ndarray:
    """Per-PRB weighted value of the best data user (0 when K = 0)."""
    N, nu = B.shape
    if nu - U == 0:
        return np.zeros(N)
    return (B[:, U:] * np.asarray(weights, dtype=float)).max(axis=1)


# ---------------------------------------------------------------------------
# Frame-level policy


def _frame_tti_symmetry(B: np.ndarray, U: int, T: int) -> int:
    """TTIs worth modelling explicitly when the channel holds all frame.

    With B constant across TTIs, at most U TTIs can contain voice service
    and all voice-free TTIs are interchangeable, so solving over
    min(T, U) TTIs and extending each remaining TTI with its data-optimal
    allocation is exact.
    """
    return min(T, U) if U > 0 else 0


def _partitions_into(users: list[int], max_blocks: int):
    """Yield all partitions of `users` into at most max_blocks nonempty blocks.

    Standard restricted-growth recursion: each user joins an existing block
    or opens a new one while capacity remains.
    """
    blocks: list[list[int]] = []

    def rec(i):
        if i == len(users):
            yield [list(b) for b in blocks]
            return
        u = users[i]
        for b in blocks:
            b.append(u)
            yield from rec(i + 1)
            b.pop()
        if len(blocks) < max_blocks:
            blocks.append([u])
            yield from rec(i + 1)
            blocks.pop()

    yield from rec(0)


def schedule_frame_optimal(
    B: np.ndarray,
    U: int,
    K: int,
    T: int = FRAME_TTIS,
    time_limit: float | None = None,
) -> tuple[SolveOutcome, FrameAllocation | None]:
    """Solve the frame-level problem exactly and decode the allocation.

    Exploits the constant-across-frame channel: once the voice users are
    partitioned into serving TTIs the problem separates, and one TTI's
    optimum is the data-fill value minus the minimum weighted data value
    displaced by its voice group (build_tti_allocate_program).  Displaced
    cost is superadditive over disjoint groups -- a joint solution split
    user-by-user into separate TTIs keeps each user's PRBs and cost -- so
    when U <= T each voice user optimally gets a TTI alone; when U > T the
    set partitions of the users into at most T blocks are enumerated with
    per-group memoization.  Either way the result is provably optimal.
    """
    B = np.asarray(B)
    N = B.shape[0]
    free_bits = float(_weighted_fill_value(B, U, np.ones(K)).sum())
    deadline = None if time_limit is None else time.monotonic() + float(time_limit)

    if U == 0:
        total = T * free_bits
        out = SolveOutcome("optimal", np.zeros(0, np.int8), total, total)
        return out, _decode_groups([], B, U, K, T)

    cache: dict[frozenset, SolveOutcome] = {}
    nodes = 0

    def solve_group(group) -> SolveOutcome:
        nonlocal nodes
        key = frozenset(group)
        if key not in cache:
            tl = None if deadline is None else max(deadline - time.monotonic(), 0.01)
            prog = build_tti_allocate_program(B, U, sorted(group), np.ones(K))
            cache[key] = solve_branch_and_bound(prog, time_limit=tl)
            nodes += cache[key].nodes
        return cache[key]

    timeout = SolveOutcome("timeout", relaxation_bound=float("nan"))
    if U <= T:
        groups = [[u] for u in range(U)]
        displaced = 0.0
        for g in groups:
            out = solve_group(g)
            if out.status == "infeasible":
                return SolveOutcome("infeasible", nodes=nodes), None
            if out.assignment is None:
                timeout.nodes = nodes
                return timeout, None
            displaced -= out.objective_value  # program maximizes -cost
        best_groups, best_displaced = groups, displaced
    else:
        best_groups, best_displaced = None, np.inf
        for part in _partitions_into(list(range(U)), T):
            displaced = 0.0
            ok = True
            for g in part:
                out = solve_group(g)
                if out.status == "infeasible":
                    ok = False
                    break
                if out.assignment is None:
                    timeout.nodes = nodes
                    return timeout, None
                displaced -= out.objective_value
                if displaced >= best_displaced:
                    ok = False
                    break
            if ok and displaced < best_displaced:
                best_groups, best_displaced = [list(g) for g in part], displaced
        if best_groups is None:
            return SolveOutcome("infeasible", nodes=nodes), None

    total = T * free_bits - best_displaced
    out = SolveOutcome("optimal", None, total, total, nodes=nodes)
    alloc = _decode_groups([(g, cache[frozenset(g)]) for g in best_groups], B, U, K, T)
    return out, alloc


def schedule_frame_relaxed_bound(B: np.ndarray, U: int, K: int, T: int = FRAME_TTIS) -> float | None:
    """LP-relaxation upper bound on the frame data objective; None if infeasible.

    This relaxes the full T-TTI frame program (no symmetry reduction): the
    reduction is exact for 0/1 solutions but can tighten the fractional
    value, and the quantity of interest here is the plain LP bound.
    """
    lp = solve_lp_relaxation(build_frame_program(np.asarray(B), U, K, T))
    if lp.status == "infeasible":
        return None
    return lp.objective


def _decode_groups(group_outcomes, B: np.ndarray, U: int, K: int, T: int) -> FrameAllocation:
    """Assemble a FrameAllocation from per-TTI voice groups and their solves."""
    N = B.shape[0]
    nu = U + K
    per_tti: list[TtiAllocation] = []
    for group, out in group_outcomes:
        served = sorted(group)
        R = len(served)
        x = np.zeros((N, nu), dtype=np.int8)
        y = np.zeros(U, dtype=np.int8)
        y[served] = 1
        for n in range(N):
            for i, u in enumerate(served):
                x[n, u] = int(round(out.assignment[n * R + i]))
        per_tti.append(_fill_and_finish(x, y, B, U, K, np.ones(K)))
    for _ in range(T - len(group_outcomes)):
        per_tti.append(_fill_and_finish(np.zeros((N, nu), np.int8), np.zeros(U, np.int8), B, U, K, np.ones(K)))
    user_bits = np.zeros(nu, dtype=np.int64)
    for tti in per_tti:
        user_bits += (tti.x * B).sum(axis=0)
    return FrameAllocation(per_tti, user_bits)


def _fill_and_finish(
    x: np.ndarray, y: np.ndarray, B: np.ndarray, U: int, K: int, weights
) -> TtiAllocation:
    """Give every voice-free PRB to its best weighted data user, then tidy up.

    Also strips objective-neutral PRBs parked on unserved voice users (they
    can only appear where the displaced data value is zero).
    """
    N = B.shape[0]
    for n in range(N):
        for u in np.flatnonzero(x[n, :U]):
            if y[u] == 0:
                x[n, u] = 0
    if K >= 1:
        best = np.argmax(B[:, U:] * np.asarray(weights, dtype=float), axis=1)
        free = x.sum(axis=1) == 0
        for n in np.flatnonzero(free):
            x[n, U + best[n]] = 1
    data_bits = (x[:, U:] * B[:, U:]).sum(axis=0).astype(np.int64)
    served = [u for u in range(U) if y[u] == 1]
    return TtiAllocation(x, y.astype(np.int8), data_bits, served)


# ---------------------------------------------------------------------------
# TTI-level two-phase policies


def tti_select_volte(
    B: np.ndarray, remaining: list[int], K: int, time_limit: float | None = None
) -> np.ndarray:
    """Phase 1: 0/1 vector over `remaining` marking voice users to serve now.

    The PRB variables of this phase are discarded; only the y outcomes are
    meaningful, and phase 2 re-derives the PRB allocation.
    """
    remaining = sorted(remaining)
    if not remaining:
        return np.zeros(0, dtype=np.int8)
    prog = build_volte_select_program(B, remaining)
    out = solve_branch_and_bound(prog, time_limit=time_limit)
    if out.assignment is None:
        raise RuntimeError(f"voice-selection phase returned {out.status} without a solution")
    nx = B.shape[0] * len(remaining)
    return out.assignment[nx:].astype(np.int8)


def tti_allocate(
    B: np.ndarray,
    U: int,
    served: list[int],
    weights: np.ndarray,
    time_limit: float | None = None,
) -> TtiAllocation:
    """Phase 2: PRB assignment maximizing weighted data bits with y fixed."""
    B = np.asarray(B)
    N = B.shape[0]
    K = B.shape[1] - U
    R = len(served)
    if np.any(np.asarray(weights) <= 0):
        raise ValueError("phase-2 weights must be positive")
    x = np.zeros((N, U + K), dtype=np.int8)
    y = np.zeros(U, dtype=np.int8)
    y[list(served)] = 1
    if R == 0:
        # No voice this TTI: every PRB goes straight to its best data user.
        return _fill_and_finish(x, y, B, U, K, weights)

    prog = build_tti_allocate_program(B, U, served, weights)
    out = solve_branch_and_bound(prog, time_limit=time_limit)
    if out.status == "infeasible":
        # Phase 1 certified this served set; infeasibility here is a bug.
        raise RuntimeError("phase-2 allocation infeasible for a phase-1-certified voice set")
    if out.assignment is None:
        raise RuntimeError("phase-2 allocation timed out without an incumbent")

    for n in range(N):
        for i, u in enumerate(served):
            x[n, u] = int(round(out.assignment[n * R + i]))
    return _fill_and_finish(x, y, B, U, K, weights)


def heuristic_tti(
    B: np.ndarray, state: SchedulerState, mode: str, strict_pseudocode: bool = False
) -> TtiAllocation:
    """One greedy TTI; updates state's remaining set and bit accumulators."""
    U, K = state.num_volte, state.num_data
    remaining = np.zeros(U, dtype=bool)
    remaining[list(state.remaining_volte)] = True
    assign, served, data_bits, ops = _kernels.heuristic_tti_kernel(
        np.asarray(B), remaining, _KERNEL_MODE[mode], state.pf_avg, strict_pseudocode
    )
    N = B.shape[0]
    x = np.zeros((N, U + K), dtype=np.int8)
    owned = assign >= 0
    x[np.arange(N)[owned], assign[owned]] = 1
    served_ids = [int(u) for u in np.flatnonzero(served)]
    y = np.zeros(U, dtype=np.int8)
    y[served_ids] = 1

    state.remaining_volte.difference_update(served_ids)
    state.c_volte += VOICE_PAYLOAD_BITS * len(served_ids)
    state.c_data += int(data_bits.sum())
    state.ops += int(ops)
    return TtiAllocation(x, y, data_bits, served_ids, ops=int(ops))


# ---------------------------------------------------------------------------
# Frame orchestrator


def run_frame(
    B: np.ndarray,
    num_volte: int,
    num_data: int,
    policy: str,
    gamma: float = 0.9,
    pf_averages_in: np.ndarray | None = None,
    T: int = FRAME_TTIS,
    time_limit: float | None = None,
    strict_pseudocode: bool = False,
) -> tuple[FrameAllocation | None, SchedulerState]:
    """Run one frame of T TTIs under the given policy.

    B is (N, U+K), or (T, N, U+K) when the channel is redrawn per TTI
    (TTI-level policies only).  The returned state carries the voice/data
    bit accumulators, the per-frame status, and the PF averages to feed
    into the next frame.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    B = np.asarray(B)
    per_tti_channel = B.ndim == 3
    state = SchedulerState(num_volte, num_data, gamma=gamma)
    if pf_averages_in is not None:
        state.pf_avg = np.asarray(pf_averages_in, dtype=float).copy()

    if policy == "frame_optimal":
        if per_tti_channel:
            raise ValueError("frame_optimal requires the channel to hold for the whole frame")
        out, alloc = schedule_frame_optimal(B, num_volte, num_data, T, time_limit=time_limit)
        if out.status == "infeasible" or alloc is None:
            state.frame_status = "infeasible" if out.status == "infeasible" else "timeout"
            return None, state
        state.frame_status = "ok" if out.status == "optimal" else "timeout"
        for tti in alloc.per_tti:
            state.remaining_volte.difference_update(tti.volte_served)
            state.c_volte += VOICE_PAYLOAD_BITS * len(tti.volte_served)
            state.c_data += tti.data_bits
            state.update_pf(tti.data_bits_per_user.astype(float))
        return alloc, state

    per_tti: list[TtiAllocation] = []
    deadline = None if time_limit is None else time.monotonic() + time_limit
    for t in range(T):
        Bt = B[t] if per_tti_channel else B
        tl = None if deadline is None else max(deadline - time.monotonic(), 0.01)
        if policy in ("tti_optimal", "tti_optimal_pf"):
            remaining = sorted(state.remaining_volte)
            y = tti_select_volte(Bt, remaining, num_data, time_limit=tl)
            served = [remaining[i] for i in range(len(remaining)) if y[i] == 1]
            weights = np.ones(num_data) if policy == "tti_optimal" else 1.0 / state.pf_avg
            tti = tti_allocate(Bt, num_volte, served, weights, time_limit=tl)
            state.remaining_volte.difference_update(tti.volte_served)
            state.c_volte += VOICE_PAYLOAD_BITS * len(tti.volte_served)
            state.c_data += tti.data_bits
        else:
            tti = heuristic_tti(Bt, state, policy, strict_pseudocode)
        state.update_pf(tti.data_bits_per_user.astype(float))
        per_tti.append(tti)

    user_bits = np.zeros(num_volte + num_data, dtype=np.int64)
    for t, tti in enumerate(per_tti):
        Bt = B[t] if per_tti_channel else B
        user_bits += (tti.x * Bt).sum(axis=0)
    return FrameAllocation(per_tti, user_bits), state
