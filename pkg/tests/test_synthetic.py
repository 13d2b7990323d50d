import numpy as np
import pytest

from drayplan.domain import validate_instance
from drayplan.model import build_model
from drayplan.pipeline import SpecError, SyntheticSpec, binary_count, generate_synthetic
from drayplan.solver import OPTIMAL, check_solution, solve_milp


def test_zero_demand_is_feasible_with_no_trucks_electrified():
    inst = generate_synthetic(SyntheticSpec(n_trucks=1, n_stations=1, n_substations=1, step_count=4, demand_scale=0.0))
    assert np.all(inst.trucks[0].consumption == 0)
    ir = build_model(inst, 2, target=0)
    x = np.zeros(ir.n_vars)
    assert check_solution(ir, x).ok


def test_single_charging_window_mode1_optimum_is_one():
    spec = SyntheticSpec(n_trucks=1, n_stations=1, n_substations=1, step_count=4, seed=2,
                         max_access_per_truck=1, depot_share=0.0)
    inst = generate_synthetic(spec)
    assert len(inst.access.truck_station) == 1
    sol = solve_milp(build_model(inst, 1))
    assert sol.status == OPTIMAL and sol.objective == 1.0


@pytest.mark.parametrize("seed", range(20))
def test_generated_instances_validate(seed):
    rng = np.random.default_rng(seed)
    spec = SyntheticSpec(n_trucks=int(rng.integers(1, 6)), n_stations=int(rng.integers(1, 4)),
                         n_substations=int(rng.integers(1, 3)), step_count=int(rng.integers(2, 13)), seed=seed)
    assert validate_instance(generate_synthetic(spec)).ok


def test_generation_is_deterministic():
    from drayplan.io import instance_to_dict

    spec = SyntheticSpec(n_trucks=3, seed=5)
    assert instance_to_dict(generate_synthetic(spec)) == instance_to_dict(generate_synthetic(spec))


@pytest.mark.parametrize("kwargs", [
    dict(step_count=1),
    dict(n_stations=0),
    dict(stop_probability=0.0),
    dict(capacity_kw=(5.0, 1.0)),
    dict(step_count=4, step_hours=8.0),
    dict(max_access_per_truck=0),
])
def test_contradictory_specs_are_rejected(kwargs):
    with pytest.raises(SpecError):
        generate_synthetic(SyntheticSpec(**kwargs))


def test_binary_count_bounds_the_model():
    inst = generate_synthetic(SyntheticSpec(n_trucks=3, n_stations=3, n_substations=2, step_count=8, seed=1,
                                            max_access_per_truck=3))
    free = [v for v in build_model(inst, 2, target=1).integer_vars() if v.lower < v.upper]
    assert len(free) <= binary_count(inst, 2)


def test_spec_round_trip():
    spec = SyntheticSpec(n_trucks=4, capacity_kw=(10.0, 20.0), params={"kappa": 0.9})
    assert SyntheticSpec.from_dict(spec.to_dict()) == spec
