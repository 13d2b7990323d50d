import numpy as np
import pytest

from drayplan.model import build_model
from drayplan.solver import brute_force_oracle, check_solution

from helpers import make_instance


def two_station_model():
    stop = (1.0, 0.0, 1.0, 0.0)
    inst = make_instance([(stop, (0.0, 10.0, 0.0, 10.0), 50.0)], n_stations=2,
                         triples=[(0, j, t) for j in (0, 1) for t in (0, 2)])
    return inst, build_model(inst, 2, target=1)


def test_oracle_solution_is_clean():
    _inst, ir = two_station_model()
    sol = brute_force_oracle(ir)
    report = check_solution(ir, sol)
    assert report.ok and len(report) == 0 and report.summary() == "feasible"


def test_two_stations_at_once_reports_the_one_station_rule():
    _inst, ir = two_station_model()
    x = brute_force_oracle(ir).x.copy()
    x[ir.var("phat", (0, 0, 2)).index] = 1.0
    x[ir.var("phat", (0, 1, 2)).index] = 1.0
    report = check_solution(ir, x)
    assert "one_station[0,2]" in report.tags()


def test_energy_perturbation_hits_exactly_two_balances():
    inst, ir = two_station_model()
    sol = brute_force_oracle(ir)
    x = sol.x.copy()
    # pick a step whose level has room for one more kWh within the SoC window
    P = inst.params
    cap = sol["ecap[0]"]
    t = next(t for t in range(4) if sol[f"e[0,{t}]"] + 1 <= P.soc_max * cap)
    x[ir.var("e", (0, t)).index] += 1.0
    energy = [tag for tag in check_solution(ir, x).tags() if tag.startswith("energy[")]
    prev = (t - 1) % 4
    assert sorted(energy) == sorted([f"energy[0,{t}]", f"energy[0,{prev}]"])
    amounts = {v.tag: v.amount for v in check_solution(ir, x) if v.tag in energy}
    assert all(a == pytest.approx(1.0) for a in amounts.values())


def test_integrality_and_bound_violations_are_reported():
    _inst, ir = two_station_model()
    x = brute_force_oracle(ir).x.copy()
    x[ir.var("x", 0).index] = 0.5
    x[ir.var("Pchs", 0).index] = -3.0
    report = check_solution(ir, x)
    assert "x[0]" in report.tags("integrality")
    assert "Pchs[0]" in report.tags("bound")
    assert "x" in report.families() and report.summary().startswith(f"{len(report)} violation")


def test_tolerance_is_respected():
    _inst, ir = two_station_model()
    x = brute_force_oracle(ir).x.copy()
    x[ir.var("e", (0, 1)).index] += 1e-8
    assert check_solution(ir, x, tol=1e-6).ok
    assert not check_solution(ir, x, tol=1e-10).ok
