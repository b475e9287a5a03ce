"""0/1 program container and the three solver routes."""

import numpy as np
import pytest

from voltesched.bip import (
    EXHAUSTIVE_MAX_VARS,
    BinaryProgram,
    solve_branch_and_bound,
    solve_exhaustive,
    solve_lp_relaxation,
)


def _random_program(rng, max_vars=12):
    n = int(rng.integers(1, max_vars + 1))
    c = rng.integers(-10, 11, size=n).astype(float)
    if rng.random() < 0.4:
        c = c + rng.random(n)  # exercise the non-integral-objective path too
    eq, ge = [], []
    for _ in range(rng.integers(0, 3)):
        eq.append((rng.integers(-3, 4, size=n).astype(float), float(rng.integers(-2, 5))))
    for _ in range(rng.integers(0, 4)):
        ge.append((rng.integers(-3, 4, size=n).astype(float), float(rng.integers(-4, 4))))
    return BinaryProgram.from_rows(c, eq, ge)


def test_check_assignment():
    p = BinaryProgram.from_rows([1.0, 1.0], [([1.0, 1.0], 1.0)], [([1.0, 0.0], 0.0)])
    assert p.check_assignment(np.array([1, 0]))
    assert p.check_assignment(np.array([0, 1]))
    assert not p.check_assignment(np.array([1, 1]))


def test_dump_renders_rows():
    p = BinaryProgram.from_rows([2.0], [([1.0], 1.0)], [([3.0], 2.0)])
    text = p.dump()
    assert "max 2" in text
    assert "eq 1 = 1" in text
    assert "ge 3 >= 2" in text


def test_exhaustive_trivia():
    p = BinaryProgram.from_rows([1.0])
    out = solve_exhaustive(p)
    assert out.status == "optimal" and out.assignment[0] == 1

    p = BinaryProgram.from_rows([3.0, 5.0], [([1.0, 1.0], 1.0)])
    out = solve_exhaustive(p)
    assert list(out.assignment) == [0, 1]
    assert out.objective_value == 5.0


def test_exhaustive_guard():
    with pytest.raises(ValueError):
        solve_exhaustive(BinaryProgram.from_rows(np.zeros(EXHAUSTIVE_MAX_VARS + 1)))


def test_lp_relaxation_trivial():
    r = solve_lp_relaxation(BinaryProgram.from_rows([1.0]))
    assert r.status == "optimal" and r.objective == pytest.approx(1.0)


def test_bnb_all_integral_root_zero_nodes():
    # LP optimum is already 0/1 -> no branching at all.
    p = BinaryProgram.from_rows([1.0, 2.0])
    out = solve_branch_and_bound(p)
    assert out.status == "optimal"
    assert out.nodes == 0
    assert out.objective_value == 3.0


def test_bnb_infeasible():
    p = BinaryProgram.from_rows([1.0], [([1.0], 2.0)])
    assert solve_branch_and_bound(p).status == "infeasible"


def test_bnb_timeout_status():
    rng = np.random.default_rng(0)
    # A program that needs at least some branching.
    n = 16
    c = rng.integers(1, 30, size=n).astype(float) + 0.5
    w = rng.integers(1, 30, size=n).astype(float)
    p = BinaryProgram.from_rows(c, [], [(-w, -float(w.sum() // 3))])
    out = solve_branch_and_bound(p, time_limit=0.0)
    assert out.status == "timeout"


def test_bnb_incumbent_seed_used():
    # Knapsack where the seed is optimal; solver must confirm, not degrade it.
    c = np.array([5.0, 4.0, 3.0])
    w = np.array([4.0, 3.0, 2.0])
    p = BinaryProgram.from_rows(c, [], [(-w, -5.0)])
    seed = np.array([1, 0, 0], dtype=np.int8)
    out = solve_branch_and_bound(p, incumbent=seed)
    ref = solve_exhaustive(p)
    assert out.objective_value == ref.objective_value


def test_bnb_rejects_infeasible_incumbent():
    p = BinaryProgram.from_rows([1.0, 1.0], [([1.0, 1.0], 1.0)])
    bad = np.array([1, 1], dtype=np.int8)  # violates the equality row
    out = solve_branch_and_bound(p, incumbent=bad)
    assert out.status == "optimal"
    assert out.objective_value == 1.0


@pytest.mark.parametrize("seed", range(8))
def test_bnb_matches_exhaustive(seed):
    rng = np.random.default_rng(100 + seed)
    for _ in range(25):
        p = _random_program(rng)
        ref = solve_exhaustive(p)
        out = solve_branch_and_bound(p)
        assert out.status == ref.status
        if ref.status == "optimal":
            assert out.objective_value == pytest.approx(ref.objective_value, abs=1e-9)
            assert p.check_assignment(out.assignment, tol=1e-7)


@pytest.mark.parametrize("seed", range(4))
def test_bound_sandwich(seed):
    rng = np.random.default_rng(200 + seed)
    for _ in range(15):
        p = _random_program(rng)
        ref = solve_exhaustive(p)
        if ref.status != "optimal":
            continue
        lp = solve_lp_relaxation(p)
        out = solve_branch_and_bound(p)
        assert ref.objective_value <= lp.objective + 1e-6
        assert out.objective_value <= out.relaxation_bound + 1e-6
        assert out.objective_value == pytest.approx(ref.objective_value, abs=1e-9)


def test_feasibility_agreement():
    rng = np.random.default_rng(7)
    for _ in range(60):
        p = _random_program(rng, max_vars=8)
        feas_ex = solve_exhaustive(p).status == "optimal"
        feas_bb = solve_branch_and_bound(p).status == "optimal"
        feas_lp = solve_lp_relaxation(p).status == "optimal"
        assert feas_ex == feas_bb
        if feas_ex:
            assert feas_lp  # integral feasibility implies LP feasibility
