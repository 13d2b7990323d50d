"""Translate an :class:`~drayplan.domain.Instance` into a :class:`ModelIR`.

Variable families (indices in brackets)::

    x[i]            truck i electrified (binary)
    ecap[i]         battery capacity, kWh
    e[i,t]          battery energy at the start of step t, kWh
    p[i,t]          charging power of truck i, kW
    ptrk[i,j,t]     power drawn by truck i at station j (only where a_ijt = 1)
    phat[i,j,t]     truck i charges at station j in step t (binary)
    Pst[j,t]        station load, kW
    Pchs[j]         station power capacity, kW
    Pchs_on[j]      station deployed (binary)
    flow[j,k]       capacity reserved on substation k for station j, kW
    gamma[j,k]      station j connected to substation k (binary)
    Pupg[k]         total upgrade at substation k, kW
    Pupg_var[k]     variable part of the upgrade, kW
    Pupg_on[k]      substation k upgraded (binary)

Constraint families use the same ``family[indices]`` tags; see
:func:`expected_counts` for how many of each a model holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..domain import Instance, Subsets, derive_subsets
from .ir import BINARY, LinExpr, ModelIR

INF = math.inf
UNLIMITED = math.inf


@dataclass(frozen=True)
class BuildOptions:
    """Switches that change the formulation without changing the instance.

    ``paper_literal`` stores ``(1 - sqrt(kappa))`` of the charged energy,
    exactly as the printed battery balance reads; the default stores the
    one-way efficiency ``sqrt(kappa)``. ``strict`` adds epsilon lower bounds
    so every indicator is 1 *iff* its flow is positive, not merely *if*.
    """

    paper_literal: bool = False
    strict: bool = False
    charge_efficiency: Optional[float] = None

    def eta(self, kappa: float) -> float:
        if self.charge_efficiency is not None:
            return self.charge_efficiency
        root = math.sqrt(kappa)
        return 1.0 - root if self.paper_literal else root


@dataclass(frozen=True)
class BigMBook:
    m_station_select: Dict[int, float]
    m_substation_flow: Dict[Tuple[int, int], float]
    m_upgrade_var: float
    epsilon: float = 1e-3


def compute_bigm(inst: Instance, subsets: Optional[Subsets] = None, epsilon: float = 1e-3) -> BigMBook:
    """Tightest safe constants for the indicator links.

    A station's load never exceeds ``p_max`` times the most trucks it can
    see at once; a substation flow never exceeds that, nor what the
    substation can host after the largest possible upgrade.
    """
    sub = subsets or derive_subsets(inst.access)
    T = inst.grid.step_count
    p_max = inst.params.p_max
    m_j = {j: p_max * max((len(sub.trucks_at(j, t)) for t in range(T)), default=0)
           for j in range(inst.n_stations)}
    m_upg = float(sum(m_j.values()))
    std = inst.params.p_upg_std * inst.params.pf
    m_jk = {}
    for j, k, _d in inst.access.station_substation:
        m_jk[j, k] = min(m_j[j], inst.substations[k].remaining_capacity + std + m_upg)
    return BigMBook(m_j, m_jk, m_upg, epsilon)


# ----------------------------------------------------------------------------- trucks


def build_truck_energy(inst: Instance, ir: ModelIR, options: BuildOptions = BuildOptions()) -> List[str]:
    """Battery balance around the daily cycle and state-of-charge window."""
    P = inst.params
    grid = inst.grid
    dt = grid.step_hours
    eta = options.eta(P.kappa)
    cap = INF if P.battery_max is None else P.battery_max
    sub = derive_subsets(inst.access)
    tags = []
    for i, truck in enumerate(inst.trucks):
        x = ir.add_var("x", i, BINARY)
        ecap = ir.add_var("ecap", i, upper=cap)
        for t in grid.steps:
            ir.add_var("e", (i, t), upper=cap)
        for t in grid.steps:
            has_access = bool(sub.stations_of(i, t))
            ir.add_var("p", (i, t), upper=P.p_max if has_access else 0.0)
        for t in grid.steps:
            e_now, e_next, p = ir.var("e", (i, t)), ir.var("e", (i, grid.next(t))), ir.var("p", (i, t))
            terms = [(e_next, 1.0), (e_now, -1.0), (p, -eta * truck.stop_fraction[t] * dt),
                     (x, float(truck.consumption[t]))]
            tags.append(ir.add_constraint("energy", (i, t), terms, "=", 0.0))
            tags.append(ir.add_constraint("soc_lo", (i, t), [(e_now, 1.0), (ecap, -P.soc_min)], ">=", 0.0))
            tags.append(ir.add_constraint("soc_hi", (i, t), [(e_now, 1.0), (ecap, -P.soc_max)], "<=", 0.0))
    return tags


def build_charging_access(inst: Instance, ir: ModelIR, bigm: BigMBook,
                          options: BuildOptions = BuildOptions(), tiered: bool = False) -> List[str]:
    """Per-station charging power, one station at a time, one station per session.

    With ``tiered=True`` the per-station indicators come from the charger
    tiers instead, so only the power variables and their sums are added here.
    """
    if not ir.has_var("x[0]") and inst.n_trucks:
        raise ValueError("truck energy variables must be built first")
    sub = derive_subsets(inst.access)
    P = inst.params
    tags = []
    indicator = {}
    for i, j, t in inst.access.truck_station:
        ptrk = ir.add_var("ptrk", (i, j, t), upper=P.p_max)
        x = ir.var("x", i)
        tags.append(ir.add_constraint("cap_trk", (i, j, t), [(ptrk, 1.0), (x, -P.p_max)], "<=", 0.0))
        if tiered:
            continue
        phat = ir.add_var("phat", (i, j, t), BINARY)
        indicator[i, j, t] = {phat: 1.0}
        tags.append(ir.add_constraint("link_trk", (i, j, t), [(ptrk, 1.0), (phat, -P.p_max)], "<=", 0.0))
        if options.strict:
            tags.append(ir.add_constraint("link_trk_lo", (i, j, t),
                                          [(ptrk, 1.0), (phat, -bigm.epsilon)], ">=", 0.0))
    for i in range(inst.n_trucks):
        for t in inst.grid.steps:
            terms = [(ir.var("p", (i, t)), 1.0)]
            terms += [(ir.var("ptrk", (i, j, t)), -1.0) for j in sub.stations_of(i, t)]
            tags.append(ir.add_constraint("pdef", (i, t), terms, "=", 0.0))
    if not tiered:
        tags += add_one_station(inst, ir, indicator, sub, min_choices=2)
        tags += add_session_continuity(inst, ir, indicator, sub)
    return tags


def add_one_station(inst: Instance, ir: ModelIR, indicator, sub: Subsets, family: str = "one_station",
                    min_choices: int = 2) -> List[str]:
    """At most one station (and charger) per truck and step.

    ``indicator[i, j, t]`` maps to the linear terms that equal 1 when truck
    i charges at j in step t. Rows with fewer than ``min_choices`` stations
    are implied by the variable bounds and skipped.
    """
    tags = []
    for i in range(inst.n_trucks):
        for t in inst.grid.steps:
            js = sub.stations_of(i, t)
            if len(js) < min_choices:
                continue
            terms = [(v, c) for j in js for v, c in indicator[i, j, t].items()]
            tags.append(ir.add_constraint(family, (i, t), terms, "<=", 1.0))
    return tags


def add_session_continuity(inst: Instance, ir: ModelIR, indicator, sub: Subsets) -> List[str]:
    """A parked truck that charges at j in step t may not charge elsewhere in the next step.

    Generated for every j reachable in both t and the following step; rows
    without an alternative station are vacuous and skipped.
    """
    tags = []
    grid = inst.grid
    for i in range(inst.n_trucks):
        for t in grid.steps:
            t2 = grid.next(t)
            here, there = sub.stations_of(i, t), sub.stations_of(i, t2)
            for j in sorted(set(here) & set(there)):
                others = [j2 for j2 in there if j2 != j]
                if not others:
                    continue
                terms = list(indicator[i, j, t].items())
                terms += [(v, c) for j2 in others for v, c in indicator[i, j2, t2].items()]
                tags.append(ir.add_constraint("session", (i, j, t), terms, "<=", 1.0))
    return tags


# ---------------------------------------------------------------------------- stations


def build_station_capacity(inst: Instance, ir: ModelIR, bigm: BigMBook,
                           options: BuildOptions = BuildOptions()) -> List[str]:
    sub = derive_subsets(inst.access)
    tags = []
    for j in range(inst.n_stations):
        m = bigm.m_station_select[j]
        pchs = ir.add_var("Pchs", j, upper=m)
        on = ir.add_var("Pchs_on", j, BINARY, upper=1.0 if m > 0 else 0.0)
        for t in inst.grid.steps:
            trucks = sub.trucks_at(j, t)
            pst = ir.add_var("Pst", (j, t), upper=m)
            terms = [(pst, 1.0)] + [(ir.var("ptrk", (i, j, t)), -1.0) for i in trucks]
            tags.append(ir.add_constraint("load", (j, t), terms, "=", 0.0))
            tags.append(ir.add_constraint("cap", (j, t), [(pst, 1.0), (pchs, -1.0)], "<=", 0.0))
        tags.append(ir.add_constraint("deploy", j, [(pchs, 1.0), (on, -m)], "<=", 0.0))
        if options.strict:
            tags.append(ir.add_constraint("deploy_lo", j, [(pchs, 1.0), (on, -bigm.epsilon)], ">=", 0.0))
    return tags


def build_grid_connection(inst: Instance, ir: ModelIR, bigm: BigMBook,
                          options: BuildOptions = BuildOptions()) -> List[str]:
    """Station supply from one substation; hosting capacity plus upgrades."""
    sub = derive_subsets(inst.access)
    P = inst.params
    std = P.p_upg_std * P.pf
    m_upg = bigm.m_upgrade_var
    tags = []
    for j, k, _d in inst.access.station_substation:
        m = bigm.m_substation_flow[j, k]
        ir.add_var("flow", (j, k), upper=m)
        ir.add_var("gamma", (j, k), BINARY, upper=1.0 if m > 0 else 0.0)
    for j in range(inst.n_stations):
        ks = sub.substations_of(j)
        if not ks and bigm.m_station_select[j] > 0:
            ir.warnings.append(f"station {inst.stations[j].id} has visitors but no substation: infeasible site")
        terms = [(ir.var("Pchs", j), 1.0)] + [(ir.var("flow", (j, k)), -1.0) for k in ks]
        tags.append(ir.add_constraint("supply", j, terms, "<=", 0.0))
        for k in ks:
            flow, gamma = ir.var("flow", (j, k)), ir.var("gamma", (j, k))
            tags.append(ir.add_constraint("link_flow", (j, k),
                                          [(flow, 1.0), (gamma, -bigm.m_substation_flow[j, k])], "<=", 0.0))
            if options.strict:
                tags.append(ir.add_constraint("link_flow_lo", (j, k),
                                              [(flow, 1.0), (gamma, -bigm.epsilon)], ">=", 0.0))
        if len(ks) >= 2:
            tags.append(ir.add_constraint("one_sub", j, [(ir.var("gamma", (j, k)), 1.0) for k in ks], "<=", 1.0))
    for k, node in enumerate(inst.substations):
        upg = ir.add_var("Pupg", k, upper=std + m_upg)
        var = ir.add_var("Pupg_var", k, upper=m_upg)
        on = ir.add_var("Pupg_on", k, BINARY)
        terms = [(ir.var("flow", (j, k)), 1.0) for j in sub.stations_on(k)] + [(upg, -1.0)]
        tags.append(ir.add_constraint("host", k, terms, "<=", node.remaining_capacity))
        tags.append(ir.add_constraint("upg_def", k, [(upg, 1.0), (on, -std), (var, -1.0)], "=", 0.0))
        tags.append(ir.add_constraint("upg_var", k, [(var, 1.0), (on, -m_upg)], "<=", 0.0))
    return tags


# ------------------------------------------------------------------------------- costs


def build_costs(inst: Instance, ir: ModelIR, catalog=None) -> Dict[str, LinExpr]:
    """Annual cost expressions ``C_trk``, ``C_chg``, ``C_pwr`` (and ``C_total``, ``GHG``).

    When ``catalog`` is given the tiered charger counts replace the per-kW
    charger cost and ``N_on`` replaces ``Pchs_on`` in the fixed cost.
    """
    P, C, grid = inst.params, inst.costs, inst.grid
    dt = grid.step_hours
    c_trk, c_chg, c_pwr, ghg = LinExpr(), LinExpr(), LinExpr(), LinExpr()
    for i, truck in enumerate(inst.trucks):
        x, ecap = ir.var("x", i), ir.var("ecap", i)
        ir.add_constraint("battery", i, [(ecap, 1.0), (x, -P.e_base)], ">=", 0.0)
        c_trk.add(x, C.c_veh - C.c_btr * P.e_base).add(ecap, C.c_btr)
        ghg.constant += truck.diesel_emission
        ghg.add(x, -truck.diesel_emission)
        for t in grid.steps:
            p = ir.var("p", (i, t))
            c_trk.add(p, P.days_per_year * P.tou_price[t] * dt)
            ghg.add(p, P.carbon_intensity[t] * dt)
    for j in range(inst.n_stations):
        pchs = ir.var("Pchs", j)
        if catalog is None:
            c_chg.add(ir.var("Pchs_on", j), C.c_ctr).add(pchs, C.c_cap + C.c_chg)
        else:
            c_chg.add(ir.var("N_on", j), C.c_ctr).add(pchs, C.c_cap)
            for m, (_kw, unit_cost) in enumerate(catalog.tiers, start=1):
                c_chg.add(ir.var("N", (m, j)), unit_cost)
    for j, k, d in inst.access.station_substation:
        c_pwr.add(ir.var("gamma", (j, k)), C.c_lne * d)
    for k in range(inst.n_substations):
        c_pwr.add(ir.var("Pupg_on", k), C.c_upg_std).add(ir.var("Pupg_var", k), C.c_upg_var_per_kw)
    ir.expressions.update(C_trk=c_trk, C_chg=c_chg, C_pwr=c_pwr, C_total=c_trk + c_chg + c_pwr, GHG=ghg)
    return {"C_trk": c_trk, "C_chg": c_chg, "C_pwr": c_pwr}


def build_budget_constraint(inst: Instance, ir: ModelIR, budget: float) -> Optional[str]:
    """``C_trk + C_chg + C_pwr <= budget``; an infinite budget adds nothing."""
    if budget < 0:
        raise ValueError(f"budget must be nonnegative, got {budget}")
    if math.isinf(budget):
        return None
    total = ir.expressions.get("C_total")
    if total is None:
        raise ValueError("cost expressions must be built before the budget constraint")
    terms = [(ir.variables[j], c) for j, c in total.coefs.items()]
    return ir.add_constraint("budget", (), terms, "<=", budget - total.constant)


def set_objective(ir: ModelIR, mode: int, target: Optional[int] = None,
                  budget: Optional[float] = None, inst: Optional[Instance] = None) -> None:
    """Attach one of the three planning objectives.

    Mode 1 maximizes electrified trucks with all upgrades fixed at zero.
    Mode 2 minimizes annual cost subject to ``sum(x) >= target``.
    Mode 3 minimizes daily GHG subject to ``total cost <= budget``.
    """
    xs = ir.family("x")
    if mode == 1:
        for fam in ("Pupg", "Pupg_var", "Pupg_on"):
            for v in ir.family(fam):
                ir.fix(v, 0.0)
        ir.set_objective("max", [(v, 1.0) for v in xs])
    elif mode == 2:
        if target is None:
            raise ValueError("mode 2 needs a target number of electric trucks")
        if target > len(xs):
            ir.warnings.append(f"target {target} exceeds the {len(xs)} trucks in the instance")
        ir.add_constraint("target", (), [(v, 1.0) for v in xs], ">=", float(target))
        ir.set_objective("min", ir.expressions["C_total"])
    elif mode == 3:
        if budget is None:
            raise ValueError("mode 3 needs a budget")
        if inst is None and not math.isinf(budget):
            raise ValueError("mode 3 needs the instance to build its budget constraint")
        if not math.isinf(budget):
            build_budget_constraint(inst, ir, budget)
        ir.set_objective("min", ir.expressions["GHG"])
    else:
        raise ValueError(f"unknown mode {mode!r}")


def build_model(inst: Instance, mode: Optional[int] = None, *, target: Optional[int] = None,
                budget: Optional[float] = None, options: BuildOptions = BuildOptions(),
                catalog=None, tier_params=None, bigm: Optional[BigMBook] = None) -> ModelIR:
    """Build the complete model, optionally with an objective mode attached."""
    from . import tiers  # local import: tiers depends on this module

    bigm = bigm or compute_bigm(inst)
    ir = ModelIR(f"drayplan_mode{mode}" if mode else "drayplan")
    build_truck_energy(inst, ir, options)
    build_charging_access(inst, ir, bigm, options, tiered=catalog is not None)
    build_station_capacity(inst, ir, bigm, options)
    if catalog is not None:
        lin = tier_params or tiers.TierLinParams.default(catalog, inst.params.p_max)
        tiers.build_tier_constraints(ir, inst, catalog, lin)
        tiers.build_station_deploy_indicator(ir, inst)
    build_grid_connection(inst, ir, bigm, options)
    build_costs(inst, ir, catalog)
    if mode is not None:
        set_objective(ir, mode, target=target, budget=budget, inst=inst)
    return ir


def expected_counts(inst: Instance, options: BuildOptions = BuildOptions()) -> Dict[str, int]:
    """Closed-form variable and constraint counts of the base (untiered) model."""
    sub = derive_subsets(inst.access)
    I, J, K, T = inst.n_trucks, inst.n_stations, inst.n_substations, inst.grid.step_count
    A = len(inst.access.truck_station)
    E = len(inst.access.station_substation)
    one_station = sum(1 for key, js in sub.J_it.items() if len(js) >= 2)
    session = 0
    for i in range(I):
        for t in range(T):
            here, there = sub.stations_of(i, t), sub.stations_of(i, inst.grid.next(t))
            session += sum(1 for j in set(here) & set(there) if len(there) >= 2)
    one_sub = sum(1 for ks in sub.K_j.values() if len(ks) >= 2)
    strict = 1 if options.strict else 0
    variables = 2 * I + 2 * I * T + 2 * A + J * T + 2 * J + 2 * E + 3 * K
    constraints = (3 * I * T + A * (2 + strict) + I * T + one_station + session
                   + 2 * J * T + J * (1 + strict) + J + E * (1 + strict) + one_sub + 3 * K + I)
    return {
        "variables": variables,
        "constraints": constraints,
        "binaries": I + A + J + E + K,
        "energy": I * T,
        "session": session,
        "one_station": one_station,
    }
