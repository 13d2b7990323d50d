"""Planning scenarios on top of the model builder and solver.

Three modes are supported:

* Mode 1 maximizes the number of electrified trucks with no substation
  upgrades, optionally with hosting capacity scaled down.
* Mode 2 minimizes annual cost subject to a fleet target.
* Mode 3 minimizes daily GHG emissions under an annual budget.

Every run returns a :class:`PlanReport`, which :func:`emit_report` writes
to a directory of JSON and CSV files.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .domain import Instance
from .model.builder import BuildOptions, build_model
from .model.ir import ModelIR
from .solver.lp import INFEASIBLE, OPTIMAL
from .solver.milp import LIMIT, Solution, SolverParams, solve_milp

log = logging.getLogger(__name__)

#: Statewide drayage fleet milestones (year -> zero-emission trucks).
STATE_MILESTONES: Dict[int, int] = {2024: 1_000, 2025: 3_000, 2030: 24_000, 2035: 35_000}
#: Share of the statewide fleet that operates in the study region.
REGIONAL_SHARE = 22_000 / 35_000
#: Width of the battery histogram bins, kWh.
BATTERY_BIN_KWH = 100.0

PathLike = Union[str, Path]


@dataclass(frozen=True)
class ScenarioConfig:
    """Inputs of one planning run that are not part of the instance.

    ``targets`` maps a year to its fleet target for Mode 2. A single target
    can be given under any key; several years are solved in order with
    monotone commitment (see :func:`run_years`).
    """

    mode: int
    capacity_fraction: float = 1.0
    targets: Optional[Mapping[int, int]] = None
    budget: Optional[float] = None
    solver: SolverParams = SolverParams()
    build: BuildOptions = BuildOptions()
    out_dir: Optional[str] = None

    def __post_init__(self):
        if self.mode not in (1, 2, 3):
            raise ValueError(f"mode must be 1, 2 or 3, got {self.mode!r}")
        if not 0 < self.capacity_fraction <= 1:
            raise ValueError(f"capacity_fraction must lie in (0, 1], got {self.capacity_fraction}")
        if self.mode == 2 and not self.targets:
            raise ValueError("mode 2 needs at least one fleet target")
        if self.mode == 2 and any(int(n) < 0 for n in self.targets.values()):
            raise ValueError("fleet targets must be nonnegative")
        if self.mode == 3 and (self.budget is None or self.budget < 0):
            raise ValueError("mode 3 needs a nonnegative budget")


@dataclass(frozen=True)
class StationPlan:
    id: str
    deployed: bool
    capacity_kw: float
    energy_kwh: float
    substation: Optional[str] = None
    utilization: Optional[float] = None


@dataclass(frozen=True)
class SubstationPlan:
    id: str
    hosting_kw: float
    load_kw: float
    upgraded: bool
    upgrade_kw: float


@dataclass(frozen=True)
class PlanReport:
    """Everything a planner needs from one solve, in plain values.

    ``costs`` holds the annual ``C_trk``, ``C_chg``, ``C_pwr`` and
    ``C_total`` in USD. ``load_profile`` is the aggregate station load in
    kW per step and ``batteries`` maps each electrified truck to its
    battery capacity in kWh. ``max_trucks`` is filled by Mode 1 and, for an
    infeasible Mode 2 target, with the Mode 1 style maximum that was
    reachable instead. ``partial`` marks a plan cut short by a solver limit.
    """

    mode: int
    status: str
    objective: float
    step_hours: float
    electrified: Tuple[str, ...] = ()
    stations: Tuple[StationPlan, ...] = ()
    substations: Tuple[SubstationPlan, ...] = ()
    costs: Dict[str, float] = field(default_factory=dict)
    ghg_kg: float = 0.0
    load_profile: Tuple[float, ...] = ()
    batteries: Dict[str, float] = field(default_factory=dict)
    charged_kwh: float = 0.0
    max_trucks: Optional[int] = None
    target: Optional[int] = None
    budget: Optional[float] = None
    capacity_fraction: float = 1.0
    year: Optional[int] = None
    gap: float = 0.0
    partial: bool = False
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL

    @property
    def utilization(self) -> Dict[str, Optional[float]]:
        return {s.id: s.utilization for s in self.stations}

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    @classmethod
    def from_dict(cls, data: Mapping) -> "PlanReport":
        data = dict(data)
        data["electrified"] = tuple(data.get("electrified", ()))
        data["stations"] = tuple(StationPlan(**s) for s in data.get("stations", ()))
        data["substations"] = tuple(SubstationPlan(**s) for s in data.get("substations", ()))
        data["load_profile"] = tuple(float(v) for v in data.get("load_profile", ()))
        for key in ("objective", "gap", "budget"):
            if data.get(key) is not None:
                data[key] = float(data[key])
        return cls(**data)


def _jsonable(obj):
    """Non-finite floats become strings so the JSON stays standard."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


# ------------------------------------------------------------------------------ metrics


def _get(solution, name: str) -> float:
    """Value of ``name`` in a :class:`Solution` or a name -> value mapping (missing is 0)."""
    return float(solution.get(name, 0.0))


def ghg(solution, inst: Instance) -> float:
    """Daily emissions in kg CO2: diesel of trucks left alone plus grid charging.

    ``solution`` is a :class:`Solution` or any mapping from variable names
    to values; absent variables count as zero.
    """
    P, dt = inst.params, inst.grid.step_hours
    total = 0.0
    for i, truck in enumerate(inst.trucks):
        total += (1.0 - _get(solution, f"x[{i}]")) * truck.diesel_emission
        for t in inst.grid.steps:
            total += P.carbon_intensity[t] * _get(solution, f"p[{i},{t}]") * dt
    return float(total)


def station_energy(solution, inst: Instance) -> np.ndarray:
    """Energy delivered per station and day, kWh."""
    dt = inst.grid.step_hours
    return np.array([sum(_get(solution, f"Pst[{j},{t}]") for t in inst.grid.steps) * dt
                     for j in range(inst.n_stations)])


def utilization(solution, inst: Instance, tol: float = 1e-9) -> Dict[str, Optional[float]]:
    """Delivered over deliverable energy per station.

    A station with no capacity has an undefined rate and maps to ``None``.
    """
    energy = station_energy(solution, inst)
    span = inst.grid.step_count * inst.grid.step_hours
    out: Dict[str, Optional[float]] = {}
    for j, site in enumerate(inst.stations):
        cap = _get(solution, f"Pchs[{j}]")
        out[site.id] = float(energy[j] / (cap * span)) if cap > tol else None
    return out


def load_profile(solution, inst: Instance) -> np.ndarray:
    """Aggregate station load per step, kW."""
    return np.array([sum(_get(solution, f"Pst[{j},{t}]") for j in range(inst.n_stations))
                     for t in inst.grid.steps])


def interpolate_targets(milestones: Mapping[int, float], years: Union[int, Sequence[int]],
                        regional_share: float = REGIONAL_SHARE) -> Dict[int, int]:
    """Regional fleet targets by linear interpolation between milestone years.

    Results are rounded to the nearest integer (halves away from zero).
    Years outside the milestone span raise ``ValueError``.
    """
    if not milestones:
        raise ValueError("no milestones given")
    keys = list(milestones)
    if keys != sorted(keys):
        raise ValueError("milestones must be sorted by year")
    xs = np.array(keys, dtype=float)
    ys = np.array([milestones[k] for k in keys], dtype=float)
    years = [years] if isinstance(years, (int, np.integer)) else list(years)
    out = {}
    for y in years:
        if not xs[0] <= y <= xs[-1]:
            raise ValueError(f"year {y} lies outside the milestone span {keys[0]}-{keys[-1]}")
        value = float(np.interp(y, xs, ys)) * regional_share
        out[int(y)] = int(math.floor(value + 0.5))
    return out


# ------------------------------------------------------------------------------ reports


def make_report(inst: Instance, ir: ModelIR, sol: Solution, mode: int, **meta) -> PlanReport:
    """Collect a :class:`PlanReport` from a solved model."""
    base = dict(mode=mode, status=sol.status, step_hours=inst.grid.step_hours,
                gap=float(sol.gap) if sol.x is not None else math.inf,
                partial=sol.status == LIMIT, message=sol.message)
    base.update(meta)
    if sol.x is None:
        return PlanReport(objective=math.nan, **base)
    x = sol.x
    electrified = [tr.id for i, tr in enumerate(inst.trucks) if sol[f"x[{i}]"] > 0.5]
    batteries = {tr.id: sol[f"ecap[{i}]"] for i, tr in enumerate(inst.trucks) if sol[f"x[{i}]"] > 0.5}
    energy = station_energy(sol, inst)
    rates = utilization(sol, inst)
    link = {}
    for j, k, _d in inst.access.station_substation:
        if sol[f"gamma[{j},{k}]"] > 0.5:
            link[j] = inst.substations[k].id
    stations = tuple(
        StationPlan(site.id, sol[f"Pchs_on[{j}]"] > 0.5, sol[f"Pchs[{j}]"], float(energy[j]),
                    link.get(j), rates[site.id])
        for j, site in enumerate(inst.stations))
    subs = []
    for k, node in enumerate(inst.substations):
        load = sum(sol[f"flow[{j},{kk}]"] for j, kk, _d in inst.access.station_substation if kk == k)
        subs.append(SubstationPlan(node.id, node.remaining_capacity, float(load),
                                   sol[f"Pupg_on[{k}]"] > 0.5, sol[f"Pupg[{k}]"]))
    costs = {key: ir.expressions[key].value(x) for key in ("C_trk", "C_chg", "C_pwr", "C_total")}
    profile = load_profile(sol, inst)
    return PlanReport(
        objective=float(sol.objective), electrified=tuple(electrified), stations=stations,
        substations=tuple(subs), costs=costs, ghg_kg=ghg(sol, inst),
        load_profile=tuple(float(v) for v in profile), batteries=batteries,
        charged_kwh=float(energy.sum()), **base)


# -------------------------------------------------------------------------------- modes


def _max_trucks_model(inst: Instance, allow_upgrades: bool, options: BuildOptions, catalog=None) -> ModelIR:
    ir = build_model(inst, None, options=options, catalog=catalog)
    if not allow_upgrades:
        for fam in ("Pupg", "Pupg_var", "Pupg_on"):
            for v in ir.family(fam):
                ir.fix(v, 0.0)
    ir.set_objective("max", [(v, 1.0) for v in ir.family("x")])
    return ir


def run_mode1(inst: Instance, fraction: float = 1.0, params: SolverParams = SolverParams(),
              options: BuildOptions = BuildOptions(), catalog=None) -> PlanReport:
    """Most trucks electrifiable with hosting capacity scaled by ``fraction`` and no upgrades."""
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    scaled = inst.scaled_capacity(fraction)
    ir = build_model(scaled, 1, options=options, catalog=catalog)
    sol = solve_milp(ir, params)
    best = int(round(sol.objective)) if sol.x is not None else None
    return make_report(scaled, ir, sol, 1, max_trucks=best, capacity_fraction=fraction)


def capacity_sweep(inst: Instance, fractions: Sequence[float] = (0.2, 0.5, 1.0),
                   params: SolverParams = SolverParams(), options: BuildOptions = BuildOptions(),
                   catalog=None) -> Dict[float, PlanReport]:
    """Mode 1 at each fraction, checking that the maximum never drops as capacity grows.

    Only optimal results take part in the check; a drop between two of them
    raises ``RuntimeError`` because it can only come from a solver fault.
    """
    reports = {f: run_mode1(inst, f, params, options, catalog) for f in sorted(fractions)}
    solved = [(f, r.max_trucks) for f, r in reports.items() if r.ok]
    for (f0, n0), (f1, n1) in zip(solved, solved[1:]):
        if n1 < n0:
            raise RuntimeError(f"mode 1 maximum fell from {n0} at {f0} to {n1} at {f1}")
    return reports


def run_mode2(inst: Instance, target: int, params: SolverParams = SolverParams(),
              options: BuildOptions = BuildOptions(), catalog=None, allow_upgrades: bool = True,
              commit: Optional[PlanReport] = None, year: Optional[int] = None) -> PlanReport:
    """Cheapest plan electrifying at least ``target`` trucks.

    With ``allow_upgrades=False`` substations cannot be upgraded. When the
    target is out of reach the report has status ``"infeasible"`` and
    ``max_trucks`` holds the largest fleet reachable under the same rules.
    ``commit`` carries assets of an earlier plan that must be kept.
    """
    if target < 0:
        raise ValueError(f"target must be nonnegative, got {target}")
    ir = build_model(inst, 2, target=target, options=options, catalog=catalog)
    if not allow_upgrades:
        for fam in ("Pupg", "Pupg_var", "Pupg_on"):
            for v in ir.family(fam):
                ir.fix(v, 0.0)
    if commit is not None:
        _apply_commitment(ir, inst, commit)
    sol = solve_milp(ir, params)
    report = make_report(inst, ir, sol, 2, target=int(target), year=year)
    if sol.status == INFEASIBLE:
        cap_ir = _max_trucks_model(inst, allow_upgrades, options, catalog)
        if commit is not None:
            _apply_commitment(cap_ir, inst, commit)
        cap = solve_milp(cap_ir, params)
        best = int(round(cap.objective)) if cap.x is not None else 0
        report = replace(report, max_trucks=best,
                         message=f"target {target} is out of reach; at most {best} trucks can be electrified")
        log.info(report.message)
    return report


def run_mode3(inst: Instance, budget: float, params: SolverParams = SolverParams(),
              options: BuildOptions = BuildOptions(), catalog=None,
              cheapest: bool = False) -> PlanReport:
    """Lowest daily emissions with annual cost at most ``budget`` (``inf`` for no limit).

    Parameters
    ----------
    cheapest : bool
        When true, a second solve holds emissions at the optimum (within the
        solver's tolerances) and minimizes annual cost, so the plan buys
        nothing that does not lower emissions. The reported objective stays
        the emission value.
    """
    if not budget >= 0:
        raise ValueError(f"budget must be nonnegative, got {budget}")
    ir = build_model(inst, 3, budget=budget, options=options, catalog=catalog)
    sol = solve_milp(ir, params)
    if cheapest and sol.status == OPTIMAL:
        best = float(sol.objective)
        expr = ir.expressions["GHG"]
        slack = params.feas_tol * max(1.0, abs(best)) + params.rel_gap * abs(best)
        staged = ir.copy()
        staged.add_constraint("ghg_keep", (), [(staged.variables[j], c) for j, c in expr.coefs.items()],
                              "<=", best - expr.constant + slack)
        staged.set_objective("min", staged.expressions["C_total"])
        second = solve_milp(staged, params)
        if second.status == OPTIMAL:
            second = replace(second, objective=expr.value(second.x))
            return make_report(inst, staged, second, 3, budget=float(budget))
    return make_report(inst, ir, sol, 3, budget=float(budget))


def _apply_commitment(ir: ModelIR, inst: Instance, prior: PlanReport) -> None:
    """Keep every asset of ``prior``: its trucks, stations, links and upgrades."""
    trucks = {tr.id: i for i, tr in enumerate(inst.trucks)}
    for tid in prior.electrified:
        i = trucks[tid]
        ir.set_bounds(f"x[{i}]", lower=1.0)
        ir.set_bounds(f"ecap[{i}]", lower=min(prior.batteries[tid], ir.by_name(f"ecap[{i}]").upper))
    stations = {s.id: j for j, s in enumerate(inst.stations)}
    subs = {k.id: n for n, k in enumerate(inst.substations)}
    for plan in prior.stations:
        j = stations[plan.id]
        if plan.deployed:
            ir.set_bounds(f"Pchs_on[{j}]", lower=1.0)
            ir.set_bounds(f"Pchs[{j}]", lower=min(plan.capacity_kw, ir.by_name(f"Pchs[{j}]").upper))
        if plan.substation is not None:
            ir.set_bounds(f"gamma[{j},{subs[plan.substation]}]", lower=1.0)
    for plan in prior.substations:
        k = subs[plan.id]
        if plan.upgraded:
            ir.set_bounds(f"Pupg_on[{k}]", lower=1.0)
            ir.set_bounds(f"Pupg[{k}]", lower=min(plan.upgrade_kw, ir.by_name(f"Pupg[{k}]").upper))


def run_years(inst: Instance, targets: Mapping[int, int], params: SolverParams = SolverParams(),
              options: BuildOptions = BuildOptions(), catalog=None,
              allow_upgrades: bool = True) -> Dict[int, PlanReport]:
    """Mode 2 for each year in order, keeping every asset bought in earlier years.

    After an infeasible or unsolved year the commitment carries over from
    the last year that produced a plan.
    """
    out: Dict[int, PlanReport] = {}
    prior: Optional[PlanReport] = None
    for year in sorted(targets):
        report = run_mode2(inst, int(targets[year]), params, options, catalog,
                           allow_upgrades=allow_upgrades, commit=prior, year=year)
        out[year] = report
        if report.status in (OPTIMAL, LIMIT) and not math.isnan(report.objective):
            prior = report
    return out


def run_scenario(inst: Instance, config: ScenarioConfig, catalog=None) -> List[PlanReport]:
    """Dispatch ``config`` to the matching mode; Mode 2 returns one report per year."""
    if config.mode == 1:
        return [run_mode1(inst, config.capacity_fraction, config.solver, config.build, catalog)]
    if config.mode == 2:
        scaled = inst.scaled_capacity(config.capacity_fraction)
        return list(run_years(scaled, config.targets, config.solver, config.build, catalog).values())
    scaled = inst.scaled_capacity(config.capacity_fraction)
    return [run_mode3(scaled, config.budget, config.solver, config.build, catalog)]


# ------------------------------------------------------------------------------- output


def battery_histogram(report: PlanReport, width: float = BATTERY_BIN_KWH) -> List[Tuple[float, float, int]]:
    """``(low, high, count)`` rows over bins of ``width`` kWh covering all batteries."""
    caps = np.array(sorted(report.batteries.values()), dtype=float)
    if caps.size == 0:
        return []
    lo = math.floor(caps.min() / width) * width
    hi = max(math.floor(caps.max() / width) * width + width, lo + width)
    edges = np.arange(lo, hi + width / 2, width)
    counts, _ = np.histogram(caps, edges)
    return [(float(a), float(b), int(c)) for a, b, c in zip(edges[:-1], edges[1:], counts)]


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(v: Optional[float]) -> str:
    return "" if v is None else repr(float(v))


def summary_text(report: PlanReport) -> str:
    lines = [f"mode {report.mode}: {report.status}"]
    if report.year is not None:
        lines.append(f"year: {report.year}")
    if report.target is not None:
        lines.append(f"target trucks: {report.target}")
    if report.budget is not None:
        lines.append(f"budget (USD/yr): {report.budget:,.2f}")
    if report.capacity_fraction != 1.0:
        lines.append(f"hosting capacity fraction: {report.capacity_fraction:g}")
    if report.max_trucks is not None:
        lines.append(f"max electrifiable trucks: {report.max_trucks}")
    if report.message:
        lines.append(report.message)
    if not math.isnan(report.objective):
        lines.append(f"objective: {report.objective:,.6g}")
        lines.append(f"electrified trucks: {len(report.electrified)}")
        deployed = [s for s in report.stations if s.deployed]
        lines.append(f"stations deployed: {len(deployed)} ({sum(s.capacity_kw for s in deployed):,.1f} kW)")
        lines.append(f"substations upgraded: {sum(s.upgraded for s in report.substations)}")
        for key in ("C_trk", "C_chg", "C_pwr", "C_total"):
            lines.append(f"{key} (USD/yr): {report.costs.get(key, 0.0):,.2f}")
        lines.append(f"GHG (kg CO2/day): {report.ghg_kg:,.3f}")
        lines.append(f"energy charged (kWh/day): {report.charged_kwh:,.3f}")
    return "\n".join(lines) + "\n"


def emit_report(report: PlanReport, directory: PathLike) -> Dict[str, Path]:
    """Write the report files into ``directory`` and return their paths.

    ``load_profile.csv`` always has one row per step and ``costs.csv`` one
    row per cost component. ``battery_hist.csv`` and ``utilization.csv``
    have a row per histogram bin and per deployed station, so an empty plan
    leaves them with the header only.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / name for name in ("plan.json", "load_profile.csv", "battery_hist.csv",
                                           "utilization.csv", "costs.csv", "summary.txt")}
    paths["plan.json"].write_text(json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n")
    _write_csv(paths["load_profile.csv"], ("step", "kw"),
               ((t, _fmt(v)) for t, v in enumerate(report.load_profile)))
    _write_csv(paths["battery_hist.csv"], ("low_kwh", "high_kwh", "trucks"), battery_histogram(report))
    _write_csv(paths["utilization.csv"], ("station", "capacity_kw", "energy_kwh", "utilization"),
               ((s.id, _fmt(s.capacity_kw), _fmt(s.energy_kwh), _fmt(s.utilization))
                for s in report.stations if s.deployed))
    _write_csv(paths["costs.csv"], ("component", "usd_per_year"),
               ((k, _fmt(report.costs[k])) for k in ("C_trk", "C_chg", "C_pwr", "C_total") if k in report.costs))
    paths["summary.txt"].write_text(summary_text(report))
    return paths


def load_report(path: PathLike) -> PlanReport:
    """Read a ``plan.json`` written by :func:`emit_report` (file or its directory)."""
    path = Path(path)
    if path.is_dir():
        path = path / "plan.json"
    data = json.loads(path.read_text())
    for key in ("objective", "gap", "budget"):
        if isinstance(data.get(key), str):
            data[key] = float(data[key])
    return PlanReport.from_dict(data)
