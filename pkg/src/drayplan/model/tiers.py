"""Discrete charger types instead of a linear $/kW charger cost.

A station installs ``N[m,j]`` chargers of type m (rated ``p^m`` kW). Each
charging truck occupies one charger of the smallest type whose rating covers
its power. The exact-type indicator is built from "type m or above"
indicators, which have a two-sided big-G linearization:

    ptrk - p^(m-1) <=  G * xup[m]
    ptrk - p^(m-1) >= -G * (1 - xup[m]) + eps
    xtier[m] = xup[m] - xup[m+1],   xtier[|M|] = xup[|M|]

Power just above a rating, inside ``(p^m, p^m + eps)``, is cut off by the
margin; :func:`tier_indicator_exact` treats such values as the lower type.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from ..domain import Instance, derive_subsets
from .builder import add_one_station, add_session_continuity
from .ir import BINARY, INTEGER, ModelIR


@dataclass(frozen=True)
class ChargerCatalog:
    """Charger types as ``(power_kw, annual_unit_cost)`` in ascending power."""

    tiers: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        tiers = tuple((float(kw), float(cost)) for kw, cost in self.tiers)
        if not tiers:
            raise ValueError("catalog needs at least one charger type")
        powers = [kw for kw, _ in tiers]
        if powers[0] <= 0 or any(b <= a for a, b in zip(powers, powers[1:])):
            raise ValueError(f"charger powers must be positive and strictly increasing: {powers}")
        object.__setattr__(self, "tiers", tiers)

    @property
    def powers(self) -> List[float]:
        return [kw for kw, _ in self.tiers]

    @property
    def max_power(self) -> float:
        return self.tiers[-1][0]

    def lower_power(self, m: int) -> float:
        """Rating of type ``m - 1`` (1-based ``m``); zero below the first type."""
        return 0.0 if m == 1 else self.tiers[m - 2][0]

    @classmethod
    def from_json(cls, source: Union[str, Path, dict]) -> "ChargerCatalog":
        """Read ``{"tiers": [{"kw": 350, "cost": ...}, ...]}``."""
        data = source if isinstance(source, dict) else json.loads(Path(source).read_text())
        return cls(tuple((row["kw"], row["cost"]) for row in data["tiers"]))

    def to_json(self) -> dict:
        return {"tiers": [{"kw": kw, "cost": cost} for kw, cost in self.tiers]}


@dataclass(frozen=True)
class TierLinParams:
    G: float
    epsilon: float = 1e-3

    @classmethod
    def default(cls, catalog: ChargerCatalog, p_max: float, epsilon: float = 1e-3) -> "TierLinParams":
        return cls(p_max + catalog.max_power, epsilon)

    def check(self, catalog: ChargerCatalog, p_max: float) -> None:
        if not self.G > p_max:
            raise ValueError(f"G = {self.G} must exceed p_max = {p_max}")
        gaps = np.diff([0.0] + catalog.powers)
        if not 0 < self.epsilon < gaps.min():
            raise ValueError(f"epsilon = {self.epsilon} must lie in (0, {gaps.min()})")


def tier_indicator_exact(power: float, beta: int, catalog: ChargerCatalog, epsilon: float = 1e-3) -> np.ndarray:
    """Exact-type indicator vector for a truck drawing ``beta * power`` kW.

    Exactly one entry is 1 when ``beta * power > 0``; all entries are 0
    otherwise. Values within ``epsilon / 2`` above a rating count as that
    rating.
    """
    if power < 0:
        raise ValueError(f"power must be nonnegative, got {power}")
    if power > catalog.max_power + epsilon / 2:
        raise ValueError(f"{power} kW exceeds catalog maximum {catalog.max_power} kW")
    out = np.zeros(len(catalog.tiers), dtype=int)
    value = beta * power
    if value <= epsilon / 2:
        return out
    for m, kw in enumerate(catalog.powers):
        if value <= kw + epsilon / 2:
            out[m] = 1
            return out
    out[-1] = 1
    return out


def at_least_from_exact(exact: Sequence[int]) -> np.ndarray:
    """``xup[m] = sum(xtier[m:])``; inverse of the difference identities."""
    return np.cumsum(np.asarray(exact)[::-1])[::-1]


def build_tier_constraints(ir: ModelIR, inst: Instance, catalog: ChargerCatalog, lin: TierLinParams) -> List[str]:
    """Indicators, charger counts, one-charger rule and session lock for every accessible (i, j, t)."""
    P = inst.params
    if catalog.max_power < P.p_max:
        raise ValueError(f"largest charger {catalog.max_power} kW is below p_max {P.p_max} kW")
    lin.check(catalog, P.p_max)
    sub = derive_subsets(inst.access)
    M = len(catalog.tiers)
    tags = []
    indicator = {}
    for i, j, t in inst.access.truck_station:
        ptrk = ir.var("ptrk", (i, j, t))
        ups = [ir.add_var("xup", (m, i, j, t), BINARY) for m in range(1, M + 1)]
        exact = [ir.add_var("xtier", (m, i, j, t), BINARY) for m in range(1, M + 1)]
        for m in range(1, M + 1):
            lo = catalog.lower_power(m)
            up = ups[m - 1]
            tags.append(ir.add_constraint("tier_lin1", (m, i, j, t), [(ptrk, 1.0), (up, -lin.G)], "<=", lo))
            tags.append(ir.add_constraint("tier_lin2", (m, i, j, t), [(ptrk, 1.0), (up, -lin.G)], ">=",
                                          lo - lin.G + lin.epsilon))
            terms = [(exact[m - 1], 1.0), (up, -1.0)]
            if m < M:
                terms.append((ups[m], 1.0))
            tags.append(ir.add_constraint("tier_def", (m, i, j, t), terms, "=", 0.0))
        indicator[i, j, t] = {v: 1.0 for v in exact}
    for j in range(inst.n_stations):
        peak = max((len(sub.trucks_at(j, t)) for t in inst.grid.steps), default=0)
        for m in range(1, M + 1):
            N = ir.add_var("N", (m, j), INTEGER, upper=float(peak))
            for t in inst.grid.steps:
                trucks = sub.trucks_at(j, t)
                if not trucks:
                    continue
                n = ir.add_var("n", (m, j, t), INTEGER, upper=float(len(trucks)))
                terms = [(n, 1.0)] + [(ir.var("xtier", (m, i, j, t)), -1.0) for i in trucks]
                tags.append(ir.add_constraint("count", (m, j, t), terms, "=", 0.0))
                tags.append(ir.add_constraint("inuse", (m, j, t), [(n, 1.0), (N, -1.0)], "<=", 0.0))
    tags += add_one_station(inst, ir, indicator, sub, family="one_charger", min_choices=1)
    tags += add_session_continuity(inst, ir, indicator, sub)
    return tags


def build_station_deploy_indicator(ir: ModelIR, inst: Instance) -> List[str]:
    """``N_on[j] = 1`` whenever station j installs any charger."""
    tags = []
    for j in range(inst.n_stations):
        counts = [v for v in ir.family("N") if v.indices[1] == j]
        big = sum(v.upper for v in counts)
        on = ir.add_var("N_on", j, BINARY, upper=1.0 if big > 0 else 0.0)
        tags.append(ir.add_constraint("deploy_n", j, [(v, 1.0) for v in counts] + [(on, -big)], "<=", 0.0))
        # a station without chargers cannot hold capacity either
        tags.append(ir.add_constraint("deploy_link", j, [(ir.var("Pchs_on", j), 1.0), (on, -1.0)], "<=", 0.0))
    return tags


def tier_probe(power: float, beta: int, catalog: ChargerCatalog, lin: TierLinParams) -> ModelIR:
    """The tier inequalities for a single (i, j, t) with the truck power fixed.

    ``beta`` enters as a coefficient exactly as in the logical definition,
    so ``beta = 0`` can be checked too. Feasible points of this model are
    the admissible indicator values at ``power``.
    """
    ir = ModelIR("tier_probe")
    x = ir.add_var("power", (), lower=power, upper=power)
    M = len(catalog.tiers)
    ups = [ir.add_var("xup", m, BINARY) for m in range(1, M + 1)]
    exact = [ir.add_var("xtier", m, BINARY) for m in range(1, M + 1)]
    for m in range(1, M + 1):
        lo = catalog.lower_power(m)
        up = ups[m - 1]
        # beta * (x - lo) <= G * xup
        ir.add_constraint("tier_lin1", m, [(x, float(beta)), (up, -lin.G)], "<=", beta * lo)
        # beta * (x - lo) >= -G * (1 - xup) + eps
        ir.add_constraint("tier_lin2", m, [(x, float(beta)), (up, -lin.G)], ">=", beta * lo - lin.G + lin.epsilon)
        terms = [(exact[m - 1], 1.0), (up, -1.0)]
        if m < M:
            terms.append((ups[m], 1.0))
        ir.add_constraint("tier_def", m, terms, "=", 0.0)
    ir.set_objective("min", [])
    return ir
