"""Exact solvers for small dense 0/1 linear programs.

Three routes share one program container: the LP relaxation over the unit
box, a depth-first branch-and-bound wrapped around it, and an exhaustive
enumerator used as an independent oracle on tiny instances.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .simplex import FEAS_TOL, LpResult, solve_bounded_lp

INT_TOL = 1e-6  # integrality tolerance when reading LP solutions
PRUNE_TOL = 1e-6  # bound <= incumbent + PRUNE_TOL prunes a node
EXHAUSTIVE_MAX_VARS = 25


@dataclass
class BinaryProgram:
    """maximize objective'x over x in {0,1}^n with equality and >= rows."""

    num_vars: int
    objective: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    a_ge: np.ndarray
    b_ge: np.ndarray
    var_labels: list[str] | None = None

    @classmethod
    def from_rows(cls, objective, eq_rows=(), ge_rows=(), var_labels=None) -> "BinaryProgram":
        objective = np.asarray(objective, dtype=float)
        n = objective.shape[0]
        a_eq = np.array([r[0] for r in eq_rows], dtype=float).reshape(len(eq_rows), n)
        b_eq = np.array([r[1] for r in eq_rows], dtype=float)
        a_ge = np.array([r[0] for r in ge_rows], dtype=float).reshape(len(ge_rows), n)
        b_ge = np.array([r[1] for r in ge_rows], dtype=float)
        return cls(n, objective, a_eq, b_eq, a_ge, b_ge, var_labels)

    def check_assignment(self, x: np.ndarray, tol: float = FEAS_TOL) -> bool:
        """True if x satisfies every declared row within tol."""
        x = np.asarray(x, dtype=float)
        if self.a_eq.size and np.max(np.abs(self.a_eq @ x - self.b_eq)) > tol:
            return False
        if self.a_ge.size and np.min(self.a_ge @ x - self.b_ge) < -tol:
            return False
        return True

    def dump(self) -> str:
        """Plain-text rendering (one row per line) for external cross-checks."""
        lines = ["max " + " ".join(f"{v:g}" for v in self.objective)]
        for row, rhs in zip(self.a_eq, self.b_eq):
            lines.append("eq " + " ".join(f"{v:g}" for v in row) + f" = {rhs:g}")
        for row, rhs in zip(self.a_ge, self.b_ge):
            lines.append("ge " + " ".join(f"{v:g}" for v in row) + f" >= {rhs:g}")
        return "\n".join(lines) + "\n"


@dataclass
class SolveOutcome:
    status: str  # "optimal" | "infeasible" | "timeout"
    assignment: np.ndarray | None = None
    objective_value: float = float("nan")
    relaxation_bound: float = float("nan")
    nodes: int = 0
    extra: dict = field(default_factory=dict)


def solve_lp_relaxation(
    p: BinaryProgram, lo: np.ndarray | None = None, hi: np.ndarray | None = None
) -> LpResult:
    """LP relaxation over [0,1]^n (optionally with tightened bounds)."""
    if lo is None:
        lo = np.zeros(p.num_vars)
    if hi is None:
        hi = np.ones(p.num_vars)
    return solve_bounded_lp(p.objective, p.a_eq, p.b_eq, p.a_ge, p.b_ge, lo, hi)


def solve_branch_and_bound(
    p: BinaryProgram,
    time_limit: float | None = None,
    incumbent: np.ndarray | None = None,
) -> SolveOutcome:
    """Provably optimal 0/1 solution via depth-first LP-based branch-and-bound.

    Branches on the most fractional variable (ties to the lowest index).
    Both children's LPs are solved on expansion and the child with the
    better bound is explored first ("set to 1" first on ties), which keeps
    the dive on the tight side of the relaxation; without this ordering the
    search can wander a plateau of equal-bound fractional vertices.
    `time_limit` is wall-clock seconds; on expiry the best incumbent and the
    root bound are returned with status "timeout".  An optional feasible
    `incumbent` assignment seeds the pruning floor (verified before use).
    """
    deadline = None if time_limit is None else time.monotonic() + float(time_limit)

    root = solve_lp_relaxation(p)
    if root.status == "infeasible":
        return SolveOutcome("infeasible")
    root_bound = root.objective
    if p.num_vars == 0:
        return SolveOutcome("optimal", np.zeros(0, np.int8), 0.0, 0.0)

    best_x: np.ndarray | None = None
    best_obj = -np.inf
    if incumbent is not None:
        incumbent = np.asarray(incumbent)
        if p.check_assignment(incumbent, tol=1e-7):
            best_x = incumbent.astype(np.int8)
            best_obj = float(p.objective @ best_x)
    # With an all-integer objective every 0/1 point has integer value, so a
    # node whose bound is below best + 1 cannot contain an improvement.
    integral_obj = bool(np.all(np.abs(p.objective - np.round(p.objective)) <= 1e-9))
    prune_margin = 1.0 - PRUNE_TOL if integral_obj else PRUNE_TOL
    nodes = 0
    # Stack of (lo, hi, lp_result); LIFO gives depth-first order.
    stack: list[tuple[np.ndarray, np.ndarray, LpResult]] = [
        (np.zeros(p.num_vars), np.ones(p.num_vars), root)
    ]

    timed_out = False
    while stack:
        if deadline is not None and time.monotonic() > deadline:
            timed_out = True
            break
        lo, hi, lp = stack.pop()
        if lp.objective <= best_obj + prune_margin:
            continue
        x = lp.x
        frac = np.abs(x - np.round(x))
        j = int(np.argmax(frac))
        if frac[j] <= INT_TOL:
            xi = np.round(x).astype(np.int8)
            if p.check_assignment(xi, tol=1e-7):
                obj = float(p.objective @ xi)
                if obj > best_obj:
                    best_obj = obj
                    best_x = xi
                continue
            # Rounding broke a row: force the worst offender to a bound.
            j = int(np.argmax(np.minimum(x, 1.0 - x)))
        children = []
        for val in (0.0, 1.0):
            lo_c, hi_c = lo.copy(), hi.copy()
            if val == 0.0:
                hi_c[j] = 0.0
            else:
                lo_c[j] = 1.0
            clp = solve_lp_relaxation(p, lo_c, hi_c)
            nodes += 1
            if clp.status != "infeasible" and clp.objective > best_obj + prune_margin:
                children.append((clp.objective, val, lo_c, hi_c, clp))
        # Worse bound pushed first so the better child is popped first;
        # sort is stable, so equal bounds keep "set to 1" on top.
        children.sort(key=lambda ch: (ch[0], ch[1]))
        for _, _, lo_c, hi_c, clp in children:
            stack.append((lo_c, hi_c, clp))

    if timed_out:
        return SolveOutcome(
            "timeout",
            assignment=best_x,
            objective_value=best_obj if best_x is not None else float("nan"),
            relaxation_bound=root_bound,
            nodes=nodes,
        )
    if best_x is None:
        return SolveOutcome("infeasible", relaxation_bound=root_bound, nodes=nodes)
    return SolveOutcome(
        "optimal",
        assignment=best_x,
        objective_value=best_obj,
        relaxation_bound=root_bound,
        nodes=nodes,
    )


def solve_exhaustive(p: BinaryProgram) -> SolveOutcome:
    """Enumerate all 2^n assignments.  Guarded to n <= 25."""
    n = p.num_vars
    if n > EXHAUSTIVE_MAX_VARS:
        raise ValueError(f"exhaustive enumeration limited to {EXHAUSTIVE_MAX_VARS} variables, got {n}")
    if n == 0:
        ok = p.check_assignment(np.zeros(0))
        return SolveOutcome("optimal" if ok else "infeasible", np.zeros(0, np.int8), 0.0, 0.0)

    bits = np.arange(n, dtype=np.uint32)
    best_obj = -np.inf
    best_x = None
    chunk = 1 << 16
    for start in range(0, 1 << n, chunk):
        idx = np.arange(start, min(start + chunk, 1 << n), dtype=np.uint32)
        xs = ((idx[:, None] >> bits) & 1).astype(np.float64)
        feas = np.ones(len(idx), dtype=bool)
        if p.a_eq.size:
            feas &= np.all(np.abs(xs @ p.a_eq.T - p.b_eq) <= FEAS_TOL, axis=1)
        if p.a_ge.size:
            feas &= np.all(xs @ p.a_ge.T - p.b_ge >= -FEAS_TOL, axis=1)
        if not feas.any():
            continue
        objs = xs[feas] @ p.objective
        k = int(np.argmax(objs))
        if objs[k] > best_obj:
            best_obj = float(objs[k])
            best_x = xs[feas][k].astype(np.int8)
    if best_x is None:
        return SolveOutcome("infeasible")
    return SolveOutcome("optimal", best_x, best_obj, best_obj)
