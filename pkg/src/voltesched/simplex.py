"""Dense two-phase primal simplex with variable bounds.

Solves   maximize c'x   s.t.  A_eq x = b_eq,  A_ge x >= b_ge,  lo <= x <= hi.

Bounds are handled implicitly (nonbasic variables sit at a finite bound),
which keeps the tableau at one row per constraint.  Pricing is Dantzig by
default and falls back to Bland's rule after a run of degenerate pivots, so
the method cannot cycle.  Everything is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9  # constraint / phase-1 feasibility tolerance
COST_TOL = 1e-9  # reduced-cost optimality tolerance
PIVOT_TOL = 1e-10  # entries below this are treated as zero in the ratio test

_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2

# Consecutive non-improving pivots before switching to Bland's rule.
_DEGENERATE_STREAK = 40


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible"
    x: np.ndarray | None  # structural variables only
    objective: float  # in the original (max) sense; nan if infeasible


class SimplexError(RuntimeError):
    """Numerical failure or iteration-limit overrun inside the simplex."""


def solve_bounded_lp(
    c: np.ndarray,
    a_eq: np.ndarray,
    b_eq: np.ndarray,
    a_ge: np.ndarray,
    b_ge: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
) -> LpResult:
    """Maximize c'x over the bounded polytope described above."""
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    b_eq = np.asarray(b_eq, dtype=float).ravel()
    b_ge = np.asarray(b_ge, dtype=float).ravel()
    if n == 0:
        ok = np.all(np.abs(b_eq) <= FEAS_TOL) and np.all(b_ge <= FEAS_TOL)
        return LpResult("optimal" if ok else "infeasible", np.zeros(0) if ok else None, 0.0 if ok else float("nan"))
    a_eq = np.asarray(a_eq, dtype=float).reshape(len(b_eq), n)
    a_ge = np.asarray(a_ge, dtype=float).reshape(len(b_ge), n)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo > hi + FEAS_TOL):
        return LpResult("infeasible", None, float("nan"))

    m_eq, m_ge = a_eq.shape[0], a_ge.shape[0]
    m = m_eq + m_ge
    if m == 0:
        # Box-only problem: each variable goes to its favourable bound.
        x = np.where(c > 0, hi, lo)
        return LpResult("optimal", x, float(c @ x))

    # Structural vars | surplus vars for >= rows | one artificial per row.
    n_struct = n
    n_surp = m_ge
    n_total = n_struct + n_surp + m

    amat = np.zeros((m, n_total))
    amat[:m_eq, :n] = a_eq
    amat[m_eq:, :n] = a_ge
    for i in range(m_ge):
        amat[m_eq + i, n_struct + i] = -1.0  # a.x - s = b  with  s >= 0
    bvec = np.concatenate([b_eq, b_ge])

    lo_all = np.concatenate([lo, np.zeros(n_surp + m)])
    hi_all = np.concatenate([hi, np.full(n_surp, np.inf), np.zeros(m)])

    # Start all structural/surplus vars at their lower bound; artificials
    # absorb the residual with a sign that keeps them nonnegative.
    resid = bvec - amat[:, : n_struct + n_surp] @ lo_all[: n_struct + n_surp]
    art_sign = np.where(resid >= 0.0, 1.0, -1.0)
    art_idx = n_struct + n_surp + np.arange(m)
    amat[np.arange(m), art_idx] = art_sign
    hi_all[art_idx] = np.inf

    status = np.full(n_total, _AT_LOWER, dtype=np.int8)
    status[art_idx] = _BASIC
    basis = art_idx.copy()

    # Tableau in the current basis: B^-1 applied to amat.  Initial basis is
    # diag(art_sign), whose inverse is itself.
    tab = amat * art_sign[:, None]
    xb = np.abs(resid)

    scale = 1.0 + float(np.max(np.abs(bvec), initial=0.0))

    # Phase 1: minimize the artificial sum.
    d1 = np.zeros(n_total)
    d1[art_idx] = 1.0
    _iterate(tab, xb, basis, status, lo_all, hi_all, d1)
    if float(d1[basis] @ xb) > FEAS_TOL * scale:
        return LpResult("infeasible", None, float("nan"))

    # Pin artificials to zero for phase 2.  Any still basic are at value ~0
    # and can only make degenerate moves, which the ratio test handles.
    hi_all[art_idx] = 0.0
    xb[np.isin(basis, art_idx)] = 0.0

    d2 = np.zeros(n_total)
    d2[:n] = -c  # maximize c'x == minimize -c'x
    _iterate(tab, xb, basis, status, lo_all, hi_all, d2)

    x_all = np.where(status == _AT_UPPER, hi_all, lo_all)
    x_all[basis] = xb
    x = x_all[:n]
    return LpResult("optimal", x, float(c @ x))


def _iterate(tab, xb, basis, status, lo, hi, cost) -> None:
    """Run primal simplex iterations in place until optimal for `cost`."""
    m, n_total = tab.shape
    max_iter = 2000 + 60 * (m + n_total)
    bland = False
    stalled = 0

    for _ in range(max_iter):
        zred = cost - cost[basis] @ tab

        movable = status != _BASIC
        movable &= lo < hi  # fixed vars can never improve
        viol = np.where(
            (status == _AT_LOWER) & movable & (zred < -COST_TOL),
            -zred,
            np.where((status == _AT_UPPER) & movable & (zred > COST_TOL), zred, 0.0),
        )
        if not np.any(viol > 0.0):
            return  # optimal
        if bland:
            j = int(np.flatnonzero(viol > 0.0)[0])
        else:
            j = int(np.argmax(viol))

        sigma = 1.0 if status[j] == _AT_LOWER else -1.0
        col = tab[:, j]

        # Ratio test: entering var moves by sigma * t.
        t_best = hi[j] - lo[j]  # bound flip
        leave = -1
        leave_to = _AT_LOWER
        eff = sigma * col
        for i in range(m):
            e = eff[i]
            bi = basis[i]
            if e > PIVOT_TOL:
                ti = (xb[i] - lo[bi]) / e
                to = _AT_LOWER
            elif e < -PIVOT_TOL:
                if np.isinf(hi[bi]):
                    continue
                ti = (hi[bi] - xb[i]) / (-e)
                to = _AT_UPPER
            else:
                continue
            if ti < 0.0:
                ti = 0.0  # tiny negative slack from float noise
            better = ti < t_best - PIVOT_TOL
            if not better and ti < t_best + PIVOT_TOL and leave >= 0:
                # Tie-break: Bland mode -> lowest variable index; otherwise
                # largest pivot magnitude for stability.
                if bland:
                    better = bi < basis[leave]
                else:
                    better = abs(e) > abs(eff[leave])
            if better:
                t_best = max(ti, 0.0)
                leave = i
                leave_to = to

        if leave < 0 and np.isinf(t_best):
            raise SimplexError("unbounded direction in a box-bounded program")

        t = max(t_best, 0.0)
        if t > 0.0:
            xb -= eff * t
            stalled = 0
        else:
            stalled += 1
            if stalled >= _DEGENERATE_STREAK:
                bland = True

        if leave < 0:
            # Pure bound flip, no basis change.
            status[j] = _AT_UPPER if status[j] == _AT_LOWER else _AT_LOWER
            continue

        # Pivot: j enters, basis[leave] exits to one of its bounds.
        enter_val = (lo[j] if sigma > 0 else hi[j]) + sigma * t
        piv = tab[leave, j]
        if abs(piv) < PIVOT_TOL:
            raise SimplexError("vanishing pivot element")
        tab[leave, :] /= piv
        rest = np.delete(np.arange(m), leave)
        tab[rest, :] -= np.outer(tab[rest, j], tab[leave, :])
        tab[rest, j] = 0.0
        tab[leave, j] = 1.0

        status[basis[leave]] = leave_to
        status[j] = _BASIC
        basis[leave] = j
        xb[leave] = enter_val

    raise SimplexError("simplex iteration limit exceeded")
