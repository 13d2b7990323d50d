import json
import math
from pathlib import Path

import highspy
import numpy as np
import pytest

from drayplan.model import ModelIR, build_model
from drayplan.pipeline import SyntheticSpec, generate_synthetic
from drayplan.solver import (
    OPTIMAL,
    SolutionFileError,
    brute_force_oracle,
    export_model,
    import_model,
    import_solution,
    solve_milp,
    write_solution,
)
from drayplan.solver.mps import sidecar_path

from helpers import random_model

DATA = Path(__file__).parent / "data"
INF = math.inf


def golden_model():
    return ModelIR.from_arrays([1.0, 2.0], [[1, 1], [1, -1]], ["<=", ">="], [4, -1], [0, 0], [3, INF],
                               maximize=True, name="golden")


def test_golden_two_variable_mps(tmp_path):
    path = export_model(golden_model(), tmp_path / "g.mps")
    assert path.read_bytes() == (DATA / "golden_2var.mps").read_bytes()


def test_golden_model_optimum():
    sol = solve_milp(import_model(DATA / "golden_2var.mps"))
    assert sol.objective == pytest.approx(6.5)


def test_integer_markers_only_with_integer_columns(tmp_path):
    text = export_model(golden_model(), tmp_path / "a.mps").read_text()
    assert "MARKER" not in text
    ir = ModelIR.from_arrays([1.0, 2.0], [[1, 1]], ["<="], [4], [0, 0], [1, 5], integer=[True, False])
    text = export_model(ir, tmp_path / "b.mps").read_text()
    assert "'INTORG'" in text and "'INTEND'" in text


@pytest.mark.parametrize("fmt", ["mps", "lp"])
@pytest.mark.parametrize("seed", range(20))
def test_round_trip_keeps_the_optimum(tmp_path, fmt, seed):
    ir = random_model(np.random.default_rng(seed))
    back = import_model(export_model(ir, tmp_path / f"m.{fmt}", fmt))
    assert [v.kind for v in back.variables] == [v.kind for v in ir.variables]
    a, b = solve_milp(ir), solve_milp(back)
    assert a.status == b.status
    if a.status == OPTIMAL:
        assert b.objective == pytest.approx(a.objective, abs=1e-8)


def test_long_names_are_mangled_and_restored(tmp_path):
    inst = generate_synthetic(SyntheticSpec(n_trucks=2, n_stations=2, step_count=4, seed=1, max_access_per_truck=3))
    ir = build_model(inst, 2, target=1)
    path = export_model(ir, tmp_path / "plan.mps")
    sidecar = json.loads(sidecar_path(path).read_text())
    assert all(len(k) <= 8 for k in sidecar["columns"])
    back = import_model(path)
    assert back.names() == ir.names()
    assert [c.tag for c in back.constraints] == [c.tag for c in ir.constraints]
    assert solve_milp(back).objective == pytest.approx(solve_milp(ir).objective, rel=1e-9)


def test_solution_file_round_trip(tmp_path):
    inst = generate_synthetic(SyntheticSpec(n_trucks=2, n_stations=2, step_count=4, seed=4, max_access_per_truck=3))
    ir = build_model(inst, 2, target=1)
    ref = brute_force_oracle(ir)
    back = import_solution(write_solution(ref, tmp_path / "s.sol"), ir)
    assert back.violations.ok
    assert back.objective == pytest.approx(ref.objective, rel=1e-12)


def test_missing_variable_is_named(tmp_path):
    ir = golden_model()
    path = tmp_path / "s.sol"
    path.write_text("x[0] 1.5\n")
    with pytest.raises(SolutionFileError, match=r"x\[1\]"):
        import_solution(path, ir)
    path.write_text("x[0] 1\nx[1] 2\nzz 3\n")
    with pytest.raises(SolutionFileError, match="zz"):
        import_solution(path, ir)


def test_external_solver_solution_is_accepted(tmp_path):
    inst = generate_synthetic(SyntheticSpec(n_trucks=2, n_stations=2, step_count=4, seed=2, max_access_per_truck=3))
    ir = build_model(inst, 2, target=1)
    path = export_model(ir, tmp_path / "plan.mps")
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(str(path))
    h.run()
    assert h.getModelStatus() == highspy.HighsModelStatus.kOptimal
    lp = h.getLp()
    values = h.getSolution().col_value
    sol_path = tmp_path / "external.sol"
    sol_path.write_text("".join(f"{name} {v:.17g}\n" for name, v in zip(lp.col_names_, values)))
    sol = import_solution(sol_path, ir, name_map=path, tol=1e-5)
    ref = brute_force_oracle(ir)
    assert sol.violations.ok
    assert abs(sol.objective - ref.objective) <= 1e-5 * max(1.0, abs(ref.objective))
