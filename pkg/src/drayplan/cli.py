"""Command line interface: ``drayplan <verb> ...``.

Instances are given as a JSON path or as ``fixture:NAME`` for a bundled
fixture. Exit codes: 0 when every solve is optimal (or the command does
not solve), 1 for invalid input, 2 when a solve is infeasible and 3 when
a solver limit was hit.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from .domain import Instance, TimeGrid, validate_instance
from .io import apply_config, load_instance, save_instance
from .model.builder import BuildOptions, build_model
from .model.tiers import ChargerCatalog
from .scenario import (
    STATE_MILESTONES,
    REGIONAL_SHARE,
    PlanReport,
    emit_report,
    interpolate_targets,
    load_report,
    run_mode1,
    run_mode3,
    run_years,
    summary_text,
)
from .solver.lp import INFEASIBLE, OPTIMAL, UNBOUNDED
from .solver.milp import LIMIT, SolverParams, solve_milp
from .solver.mps import export_model, import_model, write_solution

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_LIMIT = 0, 1, 2, 3

log = logging.getLogger("drayplan")


# ------------------------------------------------------------------------------ helpers


def exit_code(statuses: Iterable[str]) -> int:
    """Worst status wins: a limit beats infeasibility, which beats optimal."""
    statuses = list(statuses)
    if any(s == LIMIT for s in statuses):
        return EXIT_LIMIT
    if any(s in (INFEASIBLE, UNBOUNDED) for s in statuses):
        return EXIT_INFEASIBLE
    if all(s == OPTIMAL for s in statuses):
        return EXIT_OK
    return EXIT_LIMIT


def _load(args, ref: str) -> Instance:
    if ref.startswith("fixture:"):
        from .fixtures import load_fixture

        inst = load_fixture(ref.split(":", 1)[1])
    else:
        inst = load_instance(ref)
    if args.config:
        inst = apply_config(inst, json.loads(Path(args.config).read_text()))
    return inst


def _solver(args) -> SolverParams:
    return SolverParams(rel_gap=args.gap, node_limit=args.node_limit, time_limit=args.time_limit,
                        branching=args.branching)


def _options(args) -> BuildOptions:
    return BuildOptions(paper_literal=args.paper_literal, strict=args.strict)


def _catalog(args) -> Optional[ChargerCatalog]:
    return ChargerCatalog.from_json(args.tiers) if args.tiers else None


def _out(args, *parts) -> Path:
    path = Path(args.out, *[str(p) for p in parts])
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(args, reports: Sequence[PlanReport], nested: bool = False) -> int:
    for report in reports:
        where = _out(args, report.year) if nested and report.year is not None else _out(args)
        emit_report(report, where)
        print(summary_text(report), end="")
        print(f"files: {where}")
    return exit_code(r.status for r in reports)


def read_year_targets(path: str) -> Dict[int, int]:
    """Year targets from JSON.

    Either a plain ``{"2030": 12, ...}`` mapping, or
    ``{"milestones": {...}, "years": [...], "regional_share": s, "scale": f}``
    which interpolates statewide milestones and multiplies by ``scale`` to
    bring them down to the instance's fleet size (rounded to nearest).
    """
    data = json.loads(Path(path).read_text())
    if "years" not in data:
        return {int(y): int(n) for y, n in data.items()}
    milestones = {int(y): float(n) for y, n in data.get("milestones", STATE_MILESTONES).items()}
    milestones = dict(sorted(milestones.items()))
    targets = interpolate_targets(milestones, data["years"], data.get("regional_share", REGIONAL_SHARE))
    scale = float(data.get("scale", 1.0))
    return {y: int(math.floor(n * scale + 0.5)) for y, n in targets.items()}


# --------------------------------------------------------------------------------- verbs


def cmd_validate(args) -> int:
    report = validate_instance(_load(args, args.instance))
    print(report if len(report) else "instance is valid")
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_ingest(args) -> int:
    from .pipeline.ingest import ingest_files

    rep = ingest_files(args.traces, args.sites, args.substations,
                       grid=TimeGrid(args.steps, 24.0 / args.steps))
    path = save_instance(rep.instance, args.output or _out(args) / "instance.json")
    print(f"{rep.instance.n_trucks} trucks, {rep.instance.n_stations} stations, "
          f"{rep.instance.n_substations} substations -> {path}")
    print(f"trucks without a usable qualified stop: {len(rep.trucks_without_stops)} "
          f"({100 * rep.share_without_stops:.1f}%)")
    return EXIT_OK


def cmd_generate(args) -> int:
    from .pipeline.synthetic import SyntheticSpec, generate_synthetic

    spec = SyntheticSpec(n_trucks=args.trucks, n_stations=args.stations, n_substations=args.substations,
                         step_count=args.steps, seed=args.seed, max_access_per_truck=args.max_access)
    path = save_instance(generate_synthetic(spec), args.output or _out(args) / "instance.json")
    print(path)
    return EXIT_OK


def _mode_kwargs(args) -> dict:
    if args.mode == 2 and args.target is None:
        raise SystemExit("build --mode 2 needs --target")
    if args.mode == 3 and args.budget is None:
        raise SystemExit("build --mode 3 needs --budget")
    return dict(target=args.target if args.mode == 2 else None,
                budget=args.budget if args.mode == 3 else None)


def cmd_build(args) -> int:
    inst = _load(args, args.instance)
    ir = build_model(inst, args.mode, options=_options(args), catalog=_catalog(args), **_mode_kwargs(args))
    path = Path(args.output) if args.output else _out(args) / f"model.{args.format}"
    export_model(ir, path, args.format)
    print(f"{path}: {ir.n_vars} variables ({len(ir.integer_vars())} integer), "
          f"{ir.n_constraints} constraints")
    return EXIT_OK


def cmd_solve(args) -> int:
    ir = import_model(args.model)
    sol = solve_milp(ir, _solver(args))
    path = Path(args.output) if args.output else _out(args) / "solution.txt"
    if sol.x is None:
        print(f"{sol.status}: no solution to write ({sol.nodes} nodes)")
    else:
        write_solution(sol, path)
        print(f"{sol.status}: objective {sol.objective:.10g}, gap {sol.gap:.3g}, {sol.nodes} nodes -> {path}")
    return exit_code([sol.status])


def cmd_mode1(args) -> int:
    inst = _load(args, args.instance)
    return _emit(args, [run_mode1(inst, args.fraction, _solver(args), _options(args), _catalog(args))])


def cmd_mode2(args) -> int:
    inst = _load(args, args.instance)
    if (args.target is None) == (args.years is None):
        raise SystemExit("mode2 needs exactly one of --target and --years")
    targets = {0: args.target} if args.years is None else read_year_targets(args.years)
    reports = run_years(inst, targets, _solver(args), _options(args), _catalog(args),
                        allow_upgrades=not args.no_upgrades)
    if args.years is None:
        reports = {0: replace(reports[0], year=None)}
    return _emit(args, list(reports.values()), nested=args.years is not None)


def cmd_mode3(args) -> int:
    inst = _load(args, args.instance)
    return _emit(args, [run_mode3(inst, args.budget, _solver(args), _options(args), _catalog(args),
                                     cheapest=args.cheapest)])


def cmd_report(args) -> int:
    report = load_report(args.plan)
    print(summary_text(report), end="")
    return exit_code([report.status])


# -------------------------------------------------------------------------------- parser


def _common() -> argparse.ArgumentParser:
    """Global flags, accepted before or after the verb."""
    p = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=S, help="random seed (default 0)")
    p.add_argument("--paper-literal", action="store_true", default=S,
                   help="store (1 - sqrt(kappa)) of charged energy in the battery balance")
    p.add_argument("--strict", action="store_true", default=S,
                   help="make every indicator 1 exactly when its flow is positive")
    p.add_argument("--tiers", metavar="FILE", default=S, help="charger catalog JSON for tiered stations")
    p.add_argument("--out", metavar="DIR", default=S, help="output directory (default ./out)")
    p.add_argument("--config", metavar="FILE", default=S, help="JSON overriding GridParams and CostBook")
    p.add_argument("--time-limit", type=float, default=S, help="solver wall-clock limit, seconds")
    p.add_argument("--node-limit", type=int, default=S, help="branch-and-bound node limit")
    p.add_argument("--gap", type=float, default=S, help="relative optimality gap (default 1e-6)")
    p.add_argument("--branching", choices=("most-fractional", "pseudo-cost"), default=S,
                   help="branch-and-bound variable choice (default most-fractional)")
    p.add_argument("-v", "--verbose", action="store_true", default=S)
    return p


DEFAULTS = dict(seed=0, paper_literal=False, strict=False, tiers=None, out="out", config=None,
                time_limit=None, node_limit=None, gap=1e-6, branching="most-fractional", verbose=False)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="drayplan", parents=[common],
                                     description="Plan electric drayage trucks, chargers and grid upgrades.")
    sub = parser.add_subparsers(dest="verb", required=True)

    def verb(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=func)
        return p

    p = verb("validate", cmd_validate, "check an instance against the data model invariants")
    p.add_argument("instance")

    p = verb("ingest", cmd_ingest, "turn trace, site and substation CSV files into an instance")
    p.add_argument("--traces", required=True)
    p.add_argument("--sites", required=True)
    p.add_argument("--substations", required=True)
    p.add_argument("--steps", type=int, default=96, help="time steps per day (default 96)")
    p.add_argument("-o", "--output", help="instance JSON path (default OUT/instance.json)")

    p = verb("generate", cmd_generate, "write a seeded synthetic instance")
    p.add_argument("--trucks", type=int, default=3)
    p.add_argument("--stations", type=int, default=2)
    p.add_argument("--substations", type=int, default=1)
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--max-access", type=int, default=3,
                   help="cap on (station, step) charging chances per truck (default 3)")
    p.add_argument("-o", "--output", help="instance JSON path (default OUT/instance.json)")

    p = verb("build", cmd_build, "export the planning model as MPS or LP text")
    p.add_argument("instance")
    p.add_argument("--mode", type=int, choices=(1, 2, 3), default=2)
    p.add_argument("--target", type=int)
    p.add_argument("--budget", type=float)
    p.add_argument("--format", choices=("mps", "lp"), default="mps")
    p.add_argument("-o", "--output", help="model path (default OUT/model.FORMAT)")

    p = verb("solve", cmd_solve, "solve an MPS or LP file and write a solution file")
    p.add_argument("model")
    p.add_argument("-o", "--output", help="solution path (default OUT/solution.txt)")

    p = verb("mode1", cmd_mode1, "maximize electrified trucks without substation upgrades")
    p.add_argument("instance")
    p.add_argument("--fraction", type=float, default=1.0, help="share of hosting capacity available")

    p = verb("mode2", cmd_mode2, "minimize annual cost meeting a fleet target")
    p.add_argument("instance")
    p.add_argument("--target", type=int)
    p.add_argument("--years", metavar="FILE", help="JSON year targets, solved in order with commitment")
    p.add_argument("--no-upgrades", action="store_true", help="forbid substation upgrades")

    p = verb("mode3", cmd_mode3, "minimize daily emissions within an annual budget")
    p.add_argument("instance")
    p.add_argument("--budget", type=float, required=True, help="USD per year (inf for no limit)")
    p.add_argument("--cheapest", action="store_true",
                   help="after the emission optimum, minimize cost at that emission level")

    p = verb("report", cmd_report, "print the summary of a written plan")
    p.add_argument("plan", help="plan.json or the directory holding it")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    for key, value in DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"drayplan {args.verb}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
