import math

import numpy as np
import pytest

from drayplan.model import ModelIR, build_model
from drayplan.pipeline import SyntheticSpec, generate_synthetic
from drayplan.solver import (
    LIMIT,
    OPTIMAL,
    OracleGuardError,
    SolverParams,
    brute_force_oracle,
    check_solution,
    relative_gap,
    solve_lp,
    solve_milp,
)

from helpers import three_truck_single_window

INF = math.inf


def random_milp(rng, n=6, m=4):
    """Bounded mixed 0-1/integer program with a feasible all-zero point."""
    A = rng.integers(-3, 6, size=(m, n)).astype(float)
    b = rng.integers(2, 12, size=m).astype(float)
    c = rng.integers(-9, 9, size=n).astype(float)
    kinds = rng.integers(0, 3, size=n)  # 0 continuous, 1 binary, 2 general integer
    lb = np.zeros(n)
    ub = np.where(kinds == 1, 1.0, np.where(kinds == 2, 4.0, 5.0))
    return ModelIR.from_arrays(c, A, ["<="] * m, b, lb, ub, integer=kinds > 0)


def tiny_mode2(seed):
    inst = generate_synthetic(SyntheticSpec(n_trucks=2, n_stations=2, n_substations=1, step_count=4,
                                            seed=seed, max_access_per_truck=3))
    return build_model(inst, 2, target=1)


def test_all_binaries_fixed_equals_lp():
    ir = tiny_mode2(0)
    ref = brute_force_oracle(ir)
    fixed = ir.copy()
    for v in fixed.integer_vars():
        fixed.fix(v.name, round(ref[v.name]))
    milp, lp = solve_milp(fixed), solve_lp(fixed)
    assert milp.status == lp.status == OPTIMAL
    assert milp.objective == pytest.approx(lp.objective, rel=1e-9)
    assert milp.nodes == 1


@pytest.mark.parametrize("seed", range(6))
def test_tiny_mode2_matches_oracle(seed):
    ir = tiny_mode2(seed)
    a, b = solve_milp(ir), brute_force_oracle(ir)
    assert a.status == b.status
    if a.status == OPTIMAL:
        assert abs(a.objective - b.objective) <= 1e-6 * max(1.0, abs(b.objective))
        assert check_solution(ir, a).ok


def test_mode1_with_room_for_one_peak():
    sol = solve_milp(build_model(three_truck_single_window(1.0), 1))
    assert sol.objective == 1.0
    assert sum(round(sol[f"x[{i}]"]) for i in range(3)) == 1


@pytest.mark.parametrize("seed", range(15))
def test_random_milps_match_oracle(seed):
    ir = random_milp(np.random.default_rng(seed))
    a, b = solve_milp(ir), brute_force_oracle(ir)
    assert a.status == b.status == OPTIMAL
    assert a.objective == pytest.approx(b.objective, abs=1e-9)


@pytest.mark.parametrize("rule", ["most-fractional", "pseudo-cost"])
def test_branching_rules_agree(rule):
    ir = tiny_mode2(3)
    ref = brute_force_oracle(ir)
    sol = solve_milp(ir, SolverParams(branching=rule))
    assert sol.objective == pytest.approx(ref.objective, rel=1e-6)


def test_node_limit_is_flagged():
    ir = build_model(generate_synthetic(SyntheticSpec(n_trucks=3, n_stations=3, step_count=6, seed=5)), 2, target=2)
    sol = solve_milp(ir, SolverParams(node_limit=2))
    assert sol.status == LIMIT
    assert sol.nodes <= 2
    assert "limit" in sol.message


def test_time_limit_is_flagged():
    ir = build_model(generate_synthetic(SyntheticSpec(n_trucks=4, n_stations=3, step_count=8, seed=5)), 2, target=3)
    sol = solve_milp(ir, SolverParams(time_limit=1e-3))
    assert sol.status == LIMIT


def test_solve_is_deterministic():
    ir = tiny_mode2(2)
    a, b = solve_milp(ir), solve_milp(ir)
    assert (a.status, a.objective, a.nodes) == (b.status, b.objective, b.nodes)
    assert np.array_equal(a.x, b.x)


def test_infeasible_milp():
    ir = ModelIR.from_arrays([1, 1], [[1, 1]], [">="], [3], [0, 0], [1, 1], integer=[True, True])
    assert solve_milp(ir).status == "infeasible"
    assert brute_force_oracle(ir).status == "infeasible"


def test_integer_rounding_gap_is_closed():
    # LP relaxation 2.5, integer optimum 2
    ir = ModelIR.from_arrays([1, 1], [[2, 2]], ["<="], [5], [0, 0], [5, 5], integer=[True, True], maximize=True)
    sol = solve_milp(ir)
    assert sol.objective == 2.0 and sol.gap <= 1e-6
    assert solve_lp(ir).objective == pytest.approx(2.5)


def test_relative_gap():
    assert relative_gap(100.0, 99.0) == pytest.approx(0.01)
    assert relative_gap(0.0, 0.0) == 0.0


def test_solver_params_validation():
    with pytest.raises(ValueError):
        SolverParams(branching="random")
    with pytest.raises(ValueError):
        SolverParams(rel_gap=0.0)


# -------------------------------------------------------------------------- oracle


def test_oracle_single_binary_is_best_of_two_lps():
    ir = ModelIR.from_arrays([-3, -1], [[2, 1]], ["<="], [2.5], [0, 0], [1, INF], integer=[True, False])
    best = min(solve_lp(_fixed(ir, "x[0]", v)).objective for v in (0, 1))
    assert brute_force_oracle(ir).objective == pytest.approx(best)


def _fixed(ir, name, value):
    out = ir.copy()
    out.fix(name, value)
    return out


def test_oracle_without_integers_is_an_lp():
    ir = ModelIR.from_arrays([1, -2], [[1, 1], [1, -1]], ["<=", ">="], [3, -2], [0, 0], [INF, INF])
    assert brute_force_oracle(ir).objective == pytest.approx(solve_lp(ir).objective, abs=1e-9)


def test_oracle_guard():
    n = 30
    ir = ModelIR.from_arrays(np.ones(n), np.ones((1, n)), ["<="], [n], np.zeros(n), np.ones(n), integer=[True] * n)
    with pytest.raises(OracleGuardError):
        brute_force_oracle(ir, max_enumerated=24)
