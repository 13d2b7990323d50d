import math

import numpy as np
import pytest

from drayplan.model import ModelIR
from drayplan.solver import INFEASIBLE, OPTIMAL, UNBOUNDED, solve_lp

from oracles import random_standard_lp, vertex_enumeration_lp

INF = math.inf


def lp(c, A, senses, b, lb=None, ub=None, maximize=False):
    n = len(c)
    lb = [0.0] * n if lb is None else lb
    ub = [INF] * n if ub is None else ub
    return ModelIR.from_arrays(c, A, senses, b, lb, ub, maximize=maximize)


def test_unit_simplex_maximum():
    sol = solve_lp(lp([1, 1], [[1, 1]], ["<="], [1], maximize=True))
    assert sol.status == OPTIMAL and sol.objective == pytest.approx(1.0)


def test_contradictory_bounds_are_infeasible():
    sol = solve_lp(lp([1], [[1], [1]], ["<=", ">="], [0, 1]))
    assert sol.status == INFEASIBLE and sol.x is None


def test_unbounded_ray_is_detected():
    sol = solve_lp(lp([-1, 0], [[1, -1]], ["<="], [1]))
    assert sol.status == UNBOUNDED


def test_free_and_negative_bounded_columns():
    # min x + y with x in [-5, 5], y free, x + y >= -3, y >= -1 (as a row)
    sol = solve_lp(lp([1, 1], [[1, 1], [0, 1]], [">=", ">="], [-3, -1], lb=[-5, -INF], ub=[5, INF]))
    assert sol.status == OPTIMAL and sol.objective == pytest.approx(-3.0)


def test_equality_rows_and_objective_constant():
    ir = ModelIR.from_arrays([2, 3], [[1, 1]], ["="], [4], [0, 0], [INF, INF], constant=10.0)
    sol = solve_lp(ir)
    assert sol.objective == pytest.approx(18.0)
    assert sol.x == pytest.approx([4.0, 0.0])


@pytest.mark.parametrize("seed", range(20))
def test_random_dense_lps_match_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    m = int(rng.integers(2, 6))
    c, A, senses, b = random_standard_lp(rng, n, m)
    want = vertex_enumeration_lp(c, A, senses, b)
    got = solve_lp(lp(c, A, senses, b))
    assert got.status == OPTIMAL
    assert got.objective == pytest.approx(want, abs=1e-8)


@pytest.mark.parametrize("seed", range(10))
def test_dual_bound_never_exceeds_the_primal(seed):
    rng = np.random.default_rng(100 + seed)
    c, A, senses, b = random_standard_lp(rng, 8, 5)
    sol = solve_lp(lp(c, A, senses, b))
    assert sol.dual_bound <= sol.objective + 1e-8
    assert sol.dual_bound == pytest.approx(sol.objective, abs=1e-7)


@pytest.mark.parametrize("seed", range(10))
def test_warm_start_after_bound_change_matches_cold_solve(seed):
    rng = np.random.default_rng(200 + seed)
    c, A, senses, b = random_standard_lp(rng, 8, 5)
    ir = lp(c, A, senses, b)
    first = solve_lp(ir)
    form = ir.to_arrays()
    j = int(np.argmax(first.x))
    ub = form.ub.copy()
    ub[j] = np.floor(first.x[j] * 0.5)
    cold = solve_lp(form, ub=ub)
    warm = solve_lp(form, ub=ub, warm_start=first.warm_start)
    assert warm.status == cold.status
    if cold.status == OPTIMAL:
        assert warm.objective == pytest.approx(cold.objective, abs=1e-8)


def test_degenerate_lp_terminates():
    # many redundant rows through the optimal vertex
    A = [[1, 1], [1, 2], [2, 1], [1, 0], [0, 1], [3, 3]]
    sol = solve_lp(lp([-1, -1], A, ["<="] * 6, [1, 1.5, 1.5, 1, 1, 3]))
    assert sol.status == OPTIMAL and sol.objective == pytest.approx(-1.0)


def test_solution_is_primal_feasible():
    rng = np.random.default_rng(7)
    c, A, senses, b = random_standard_lp(rng, 10, 6)
    sol = solve_lp(lp(c, A, senses, b))
    act = np.asarray(A) @ sol.x
    for a, s, r in zip(act, senses, b):
        if s == "<=":
            assert a <= r + 1e-9
        elif s == ">=":
            assert a >= r - 1e-9
        else:
            assert a == pytest.approx(r, abs=1e-9)
    assert np.all(sol.x >= -1e-12)
