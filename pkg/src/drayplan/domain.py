"""Problem data: trucks, candidate stations, substations and the daily time grid.

Everything here is plain input data. Constructors coerce arrays but do not
reject bad values; :func:`validate_instance` reports every violation so a
malformed instance can be inspected instead of failing half-way through.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .costs import CostBook, tou_prices

STATION_KINDS = ("depot", "truck-stop", "intermodal")


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TimeGrid:
    """A representative day split into ``step_count`` steps of ``step_hours``.

    The horizon is cyclic: the step after the last one is step 0.
    """

    step_count: int
    step_hours: float = 0.25

    def next(self, t: int) -> int:
        return next_time(self, t)

    @property
    def steps(self) -> range:
        return range(self.step_count)


def next_time(grid: TimeGrid, t: int) -> int:
    if not 0 <= t < grid.step_count:
        raise IndexError(f"step {t} outside 0..{grid.step_count - 1}")
    return t + 1 if t < grid.step_count - 1 else 0


@dataclass(frozen=True, eq=False)
class TruckProfile:
    """Per-step activity of one truck.

    ``stop_fraction[t]`` is the share of step ``t`` spent in a qualified stop,
    ``consumption[t]`` the energy (kWh) an electric version would use in it,
    ``diesel_emission`` the daily kg CO2 of the diesel truck. ``position`` is
    an optional ``(step_count, 2)`` array of lon/lat.
    """

    id: str
    stop_fraction: np.ndarray
    consumption: np.ndarray
    diesel_emission: float
    position: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "stop_fraction", _frozen_array(self.stop_fraction))
        object.__setattr__(self, "consumption", _frozen_array(self.consumption))
        object.__setattr__(self, "diesel_emission", float(self.diesel_emission))
        if self.position is not None:
            object.__setattr__(self, "position", _frozen_array(self.position).reshape(-1, 2))


@dataclass(frozen=True)
class StationSite:
    id: str
    kind: str
    lon: float
    lat: float
    owners: FrozenSet[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "owners", frozenset(self.owners))

    @property
    def public(self) -> bool:
        return self.kind != "depot"


@dataclass(frozen=True)
class SubstationNode:
    id: str
    lon: float
    lat: float
    remaining_capacity: float


@dataclass(frozen=True)
class AccessMatrix:
    """Sparse truck-station access and station-substation adjacency.

    ``truck_station`` holds ``(i, j, t)`` index triples with ``a_ijt = 1``.
    ``station_substation`` holds ``(j, k, miles)`` edges.
    """

    truck_station: Tuple[Tuple[int, int, int], ...] = ()
    station_substation: Tuple[Tuple[int, int, float], ...] = ()
    max_neighbors: int = 5

    def __post_init__(self):
        triples = tuple(sorted({(int(i), int(j), int(t)) for i, j, t in self.truck_station}))
        edges = tuple(sorted((int(j), int(k), float(d)) for j, k, d in self.station_substation))
        object.__setattr__(self, "truck_station", triples)
        object.__setattr__(self, "station_substation", edges)


@dataclass(frozen=True, eq=False)
class GridParams:
    """Technical constants of trucks, chargers and the grid.

    ``battery_max`` caps e^cap (kWh); ``None`` leaves batteries unbounded.
    """

    tou_price: np.ndarray
    carbon_intensity: np.ndarray
    p_max: float = 1000.0
    e_base: float = 900.0
    soc_min: float = 0.10
    soc_max: float = 1.00
    kappa: float = 0.95
    pf: float = 0.95
    p_upg_std: float = 28_000.0
    days_per_year: float = 365.0
    battery_max: Optional[float] = 1200.0

    def __post_init__(self):
        object.__setattr__(self, "tou_price", _frozen_array(self.tou_price))
        object.__setattr__(self, "carbon_intensity", _frozen_array(self.carbon_intensity))

    @classmethod
    def default(cls, grid: TimeGrid, carbon_intensity: float = 0.25, **kwargs) -> "GridParams":
        """TOU tariff for ``grid`` and a flat grid carbon intensity (kg CO2/kWh)."""
        return cls(
            tou_price=tou_prices(grid.step_count, grid.step_hours),
            carbon_intensity=np.full(grid.step_count, carbon_intensity),
            **kwargs,
        )

    def scalars(self) -> dict:
        return {
            "p_max": self.p_max,
            "e_base": self.e_base,
            "soc_min": self.soc_min,
            "soc_max": self.soc_max,
            "kappa": self.kappa,
            "pf": self.pf,
            "p_upg_std": self.p_upg_std,
            "days_per_year": self.days_per_year,
            "battery_max": self.battery_max,
        }


@dataclass(frozen=True, eq=False)
class Instance:
    grid: TimeGrid
    trucks: Tuple[TruckProfile, ...]
    stations: Tuple[StationSite, ...]
    substations: Tuple[SubstationNode, ...]
    access: AccessMatrix
    params: GridParams
    costs: CostBook = field(default_factory=CostBook)

    def __post_init__(self):
        object.__setattr__(self, "trucks", tuple(self.trucks))
        object.__setattr__(self, "stations", tuple(self.stations))
        object.__setattr__(self, "substations", tuple(self.substations))

    @property
    def n_trucks(self) -> int:
        return len(self.trucks)

    @property
    def n_stations(self) -> int:
        return len(self.stations)

    @property
    def n_substations(self) -> int:
        return len(self.substations)

    def replace(self, **changes) -> "Instance":
        kwargs = dict(
            grid=self.grid, trucks=self.trucks, stations=self.stations, substations=self.substations,
            access=self.access, params=self.params, costs=self.costs,
        )
        kwargs.update(changes)
        return Instance(**kwargs)

    def scaled_capacity(self, fraction: float) -> "Instance":
        subs = tuple(
            SubstationNode(s.id, s.lon, s.lat, s.remaining_capacity * fraction) for s in self.substations
        )
        return self.replace(substations=subs)


@dataclass(frozen=True)
class Subsets:
    """Index sets derived from the access matrix; missing keys mean empty."""

    J_it: Dict[Tuple[int, int], Tuple[int, ...]]
    I_jt: Dict[Tuple[int, int], Tuple[int, ...]]
    K_j: Dict[int, Tuple[int, ...]]
    J_k: Dict[int, Tuple[int, ...]]
    distance: Dict[Tuple[int, int], float]

    def stations_of(self, i: int, t: int) -> Tuple[int, ...]:
        return self.J_it.get((i, t), ())

    def trucks_at(self, j: int, t: int) -> Tuple[int, ...]:
        return self.I_jt.get((j, t), ())

    def substations_of(self, j: int) -> Tuple[int, ...]:
        return self.K_j.get(j, ())

    def stations_on(self, k: int) -> Tuple[int, ...]:
        return self.J_k.get(k, ())


def derive_subsets(access: AccessMatrix) -> Subsets:
    J_it: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    I_jt: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    K_j: Dict[int, List[int]] = defaultdict(list)
    J_k: Dict[int, List[int]] = defaultdict(list)
    for i, j, t in access.truck_station:
        J_it[i, t].append(j)
        I_jt[j, t].append(i)
    distance = {}
    for j, k, d in access.station_substation:
        K_j[j].append(k)
        J_k[k].append(j)
        distance[j, k] = d
    freeze = lambda d: {key: tuple(sorted(v)) for key, v in d.items()}  # noqa: E731
    return Subsets(freeze(J_it), freeze(I_jt), freeze(K_j), freeze(J_k), distance)


# --------------------------------------------------------------------------- validation


@dataclass(frozen=True)
class Violation:
    entity: str
    id: str
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.entity} {self.id}: {self.field}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def __str__(self) -> str:
        if self.ok:
            return "instance is well-formed"
        return "\n".join(str(v) for v in self.violations)


def _check_series(out, entity, ident, name, arr, T):
    if arr.shape != (T,):
        out.append(Violation(entity, ident, name, f"length {arr.shape} != step_count {T}"))
        return False
    if not np.all(np.isfinite(arr)):
        out.append(Violation(entity, ident, name, "non-finite values"))
        return False
    return True


def validate_instance(inst: Instance, tol: float = 1e-9) -> ValidationReport:
    """List every invariant violation of ``inst``; an empty report means well-formed."""
    out: List[Violation] = []
    grid = inst.grid
    T = grid.step_count
    if T < 2:
        out.append(Violation("grid", "-", "step_count", f"need at least 2 steps, got {T}"))
    if not grid.step_hours > 0:
        out.append(Violation("grid", "-", "step_hours", f"must be positive, got {grid.step_hours}"))
    elif T * grid.step_hours > 24 + tol:
        out.append(Violation("grid", "-", "step_hours", f"{T} x {grid.step_hours} h exceeds a 24 h day"))

    _dupes(out, "truck", [tr.id for tr in inst.trucks])
    _dupes(out, "station", [s.id for s in inst.stations])
    _dupes(out, "substation", [s.id for s in inst.substations])

    for tr in inst.trucks:
        ok_stop = _check_series(out, "truck", tr.id, "stop_fraction", tr.stop_fraction, T)
        ok_con = _check_series(out, "truck", tr.id, "consumption", tr.consumption, T)
        if ok_stop:
            for t in np.flatnonzero((tr.stop_fraction < -tol) | (tr.stop_fraction > 1 + tol)):
                out.append(Violation("truck", tr.id, f"stop_fraction[{t}]",
                                     f"{tr.stop_fraction[t]} outside [0, 1]"))
        if ok_con:
            for t in np.flatnonzero(tr.consumption < -tol):
                out.append(Violation("truck", tr.id, f"consumption[{t}]", f"negative {tr.consumption[t]}"))
        if ok_stop and ok_con:
            bad = (np.abs(tr.stop_fraction - 1.0) <= tol) & (tr.consumption > tol)
            for t in np.flatnonzero(bad):
                out.append(Violation("truck", tr.id, f"consumption[{t}]", "energy used during a full-step stop"))
        if not (np.isfinite(tr.diesel_emission) and tr.diesel_emission >= 0):
            out.append(Violation("truck", tr.id, "diesel_emission", f"invalid {tr.diesel_emission}"))
        if tr.position is not None and tr.position.shape != (T, 2):
            out.append(Violation("truck", tr.id, "position", f"shape {tr.position.shape} != ({T}, 2)"))

    truck_ids = {tr.id for tr in inst.trucks}
    for s in inst.stations:
        if s.kind not in STATION_KINDS:
            out.append(Violation("station", s.id, "kind", f"unknown kind {s.kind!r}"))
        elif s.kind == "depot" and not s.owners:
            out.append(Violation("station", s.id, "owners", "depot without owner trucks"))
        elif s.kind != "depot" and s.owners:
            out.append(Violation("station", s.id, "owners", "public site with owners"))
        for o in sorted(s.owners - truck_ids):
            out.append(Violation("station", s.id, "owners", f"unknown truck {o!r}"))

    for k in inst.substations:
        if not (np.isfinite(k.remaining_capacity) and k.remaining_capacity >= 0):
            out.append(Violation("substation", k.id, "remaining_capacity", f"invalid {k.remaining_capacity}"))

    _validate_access(out, inst, tol)
    _validate_params(out, inst.params, T)
    return ValidationReport(tuple(out))


def _dupes(out, entity, ids):
    seen = set()
    for x in ids:
        if x in seen:
            out.append(Violation(entity, x, "id", "duplicate id"))
        seen.add(x)


def _validate_access(out, inst: Instance, tol: float):
    I, J, K, T = inst.n_trucks, inst.n_stations, inst.n_substations, inst.grid.step_count
    for i, j, t in inst.access.truck_station:
        label = f"[{i},{j},{t}]"
        if not (0 <= i < I and 0 <= j < J and 0 <= t < T):
            out.append(Violation("access", label, "truck_station", "index out of range"))
            continue
        truck = inst.trucks[i]
        if truck.stop_fraction.shape == (T,) and not truck.stop_fraction[t] > tol:
            out.append(Violation("access", label, "truck_station", "access without stop"))
        site = inst.stations[j]
        if site.kind == "depot" and truck.id not in site.owners:
            out.append(Violation("access", label, "truck_station", "depot used by a non-owner truck"))
    per_station = defaultdict(set)
    for j, k, d in inst.access.station_substation:
        label = f"[{j},{k}]"
        if not (0 <= j < J and 0 <= k < K):
            out.append(Violation("access", label, "station_substation", "index out of range"))
            continue
        if not (np.isfinite(d) and d >= 0):
            out.append(Violation("access", label, "station_substation", f"invalid distance {d}"))
        if k in per_station[j]:
            out.append(Violation("access", label, "station_substation", "duplicate edge"))
        per_station[j].add(k)
    for j, ks in per_station.items():
        if len(ks) > inst.access.max_neighbors:
            out.append(Violation("access", f"[{j}]", "station_substation",
                                 f"{len(ks)} neighbors exceed limit {inst.access.max_neighbors}"))


def _validate_params(out, p: GridParams, T: int):
    def bad(name, msg):
        out.append(Violation("params", "-", name, msg))

    if not 0 <= p.soc_min < p.soc_max <= 1:
        bad("soc_min/soc_max", f"need 0 <= {p.soc_min} < {p.soc_max} <= 1")
    if not 0 < p.kappa <= 1:
        bad("kappa", f"{p.kappa} outside (0, 1]")
    if not 0 < p.pf <= 1:
        bad("pf", f"{p.pf} outside (0, 1]")
    if not p.p_max > 0:
        bad("p_max", f"must be positive, got {p.p_max}")
    if p.e_base < 0:
        bad("e_base", f"negative {p.e_base}")
    if p.p_upg_std < 0:
        bad("p_upg_std", f"negative {p.p_upg_std}")
    if p.days_per_year <= 0:
        bad("days_per_year", f"must be positive, got {p.days_per_year}")
    if p.battery_max is not None and p.battery_max < p.e_base:
        bad("battery_max", f"{p.battery_max} below base capacity {p.e_base}")
    if p.tou_price.shape != (T,):
        bad("tou_price", f"length {p.tou_price.shape} != step_count {T}")
    if p.carbon_intensity.shape != (T,):
        bad("carbon_intensity", f"length {p.carbon_intensity.shape} != step_count {T}")
    elif np.any(p.carbon_intensity < 0):
        bad("carbon_intensity", "negative intensity")


def station_index(inst: Instance) -> Dict[str, int]:
    return {s.id: j for j, s in enumerate(inst.stations)}


def truck_index(inst: Instance) -> Dict[str, int]:
    return {tr.id: i for i, tr in enumerate(inst.trucks)}


def owners_by_index(inst: Instance) -> Dict[int, FrozenSet[int]]:
    """Depot index -> owner truck indices."""
    idx = truck_index(inst)
    return {j: frozenset(idx[o] for o in s.owners if o in idx) for j, s in enumerate(inst.stations)}


def access_from_sets(J_it: Dict[Tuple[int, int], Iterable[int]], edges: Sequence[Tuple[int, int, float]] = (),
                     max_neighbors: int = 5) -> AccessMatrix:
    """Rebuild an access matrix from ``J_it``; inverse of :func:`derive_subsets`."""
    triples = [(i, j, t) for (i, t), js in J_it.items() for j in js]
    return AccessMatrix(tuple(triples), tuple(edges), max_neighbors)
