"""Seeded desk-scale instances for tests, demos and the CLI ``generate`` verb."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

import numpy as np

from ..costs import CostBook
from ..domain import (
    AccessMatrix,
    GridParams,
    Instance,
    StationSite,
    SubstationNode,
    TimeGrid,
    TruckProfile,
)
from .sites import nearest_substations
from .traces import DIESEL_KG_PER_MILE, KWH_PER_MILE

CENTER = (-118.22, 33.77)  # lon, lat near the San Pedro Bay ports
MILES_PER_DEG_LAT = 69.0


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs of :func:`generate_synthetic`.

    ``demand_scale`` multiplies every trip's energy use (0 gives trucks
    that never consume). ``force_feasible`` guarantees that every truck has
    at least one charging opportunity, that its daily energy fits in the
    battery window, and that every station has a substation. It cannot be
    combined with a spec that rules these out.
    """

    n_trucks: int = 2
    n_stations: int = 2
    n_substations: int = 1
    step_count: int = 4
    step_hours: Optional[float] = None
    seed: int = 0
    extent_miles: float = 5.0
    stop_probability: float = 0.5
    trip_miles: Tuple[float, float] = (5.0, 40.0)
    demand_scale: float = 1.0
    depot_share: float = 0.5
    access_probability: float = 0.7
    max_access_per_truck: Optional[int] = None
    capacity_kw: Tuple[float, float] = (1000.0, 3000.0)
    carbon_intensity: float = 0.25
    k_nearest: int = 2
    force_feasible: bool = True
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SyntheticSpec":
        data = dict(data)
        for key in ("trip_miles", "capacity_kw"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


class SpecError(ValueError):
    """The spec asks for something that cannot be generated."""


def _check(spec: SyntheticSpec) -> float:
    for name in ("n_trucks", "n_stations", "n_substations"):
        if getattr(spec, name) < 0:
            raise SpecError(f"{name} must be nonnegative")
    if spec.step_count < 2:
        raise SpecError("step_count must be at least 2")
    dt = spec.step_hours if spec.step_hours is not None else 24.0 / spec.step_count
    if dt <= 0 or spec.step_count * dt > 24 + 1e-9:
        raise SpecError(f"{spec.step_count} steps of {dt} h do not fit in a day")
    for name in ("stop_probability", "depot_share", "access_probability"):
        if not 0 <= getattr(spec, name) <= 1:
            raise SpecError(f"{name} must lie in [0, 1]")
    if spec.demand_scale < 0 or spec.trip_miles[0] < 0 or spec.trip_miles[0] > spec.trip_miles[1]:
        raise SpecError("trip miles and demand scale must be nonnegative ranges")
    if spec.capacity_kw[0] < 0 or spec.capacity_kw[0] > spec.capacity_kw[1]:
        raise SpecError("capacity range must be nonnegative and ordered")
    if spec.force_feasible and spec.n_trucks and spec.demand_scale > 0:
        if spec.n_stations == 0:
            raise SpecError("force_feasible needs at least one station")
        if spec.n_substations == 0:
            raise SpecError("force_feasible needs at least one substation")
        if spec.stop_probability == 0:
            raise SpecError("force_feasible needs trucks that stop")
        if spec.max_access_per_truck == 0:
            raise SpecError("force_feasible needs at least one access per truck")
    return dt


def _offset(rng, extent):
    dx, dy = rng.uniform(-extent / 2, extent / 2, size=2)
    lat = CENTER[1] + dy / MILES_PER_DEG_LAT
    lon = CENTER[0] + dx / (MILES_PER_DEG_LAT * math.cos(math.radians(CENTER[1])))
    return float(lon), float(lat)


def generate_synthetic(spec: SyntheticSpec = SyntheticSpec()) -> Instance:
    """A valid :class:`Instance` drawn from ``spec`` with ``numpy``'s default generator."""
    dt = _check(spec)
    rng = np.random.default_rng(spec.seed)
    grid = TimeGrid(spec.step_count, dt)
    T = spec.step_count
    params = GridParams.default(grid, carbon_intensity=spec.carbon_intensity, **spec.params)

    n_depots = int(round(spec.depot_share * spec.n_stations)) if spec.n_trucks else 0
    kinds = ["depot"] * n_depots + [("truck-stop", "intermodal")[k % 2] for k in range(spec.n_stations - n_depots)]
    spots = [_offset(rng, spec.extent_miles) for _ in range(spec.n_stations)]
    truck_ids = [f"T{i:03d}" for i in range(spec.n_trucks)]
    home = {i: int(rng.integers(n_depots)) for i in range(spec.n_trucks)} if n_depots else {}
    owners = {j: set() for j in range(n_depots)}
    for i, j in home.items():
        owners[j].add(truck_ids[i])
    for j in range(n_depots):
        if not owners[j]:
            owners[j].add(truck_ids[j % spec.n_trucks])
    stations = [StationSite(f"S{j:03d}", kinds[j], *spots[j], frozenset(owners.get(j, ()))) for j in range(spec.n_stations)]

    usable = (params.soc_max - params.soc_min) * (params.battery_max or params.e_base)
    trucks, triples = [], []
    for i, tid in enumerate(truck_ids):
        stop = rng.random(T) < spec.stop_probability
        if spec.force_feasible and not stop.any():
            stop[int(rng.integers(T))] = True
        miles = np.where(stop, 0.0, rng.uniform(*spec.trip_miles, size=T)) * spec.demand_scale
        if spec.force_feasible and miles.sum() * KWH_PER_MILE > 0.8 * usable:
            miles *= 0.8 * usable / (miles.sum() * KWH_PER_MILE)
        allowed = [j for j, s in enumerate(stations) if s.public or tid in s.owners]
        mine = []
        for t in np.flatnonzero(stop):
            for j in allowed:
                if rng.random() < spec.access_probability:
                    mine.append((i, j, int(t)))
        if spec.max_access_per_truck is not None and len(mine) > spec.max_access_per_truck:
            keep = np.sort(rng.choice(len(mine), size=spec.max_access_per_truck, replace=False))
            mine = [mine[k] for k in keep]
        if spec.force_feasible and not mine and allowed:
            t = int(rng.choice(np.flatnonzero(stop)))
            mine = [(i, int(rng.choice(allowed)), t)]
        triples += mine
        position = np.array([_offset(rng, spec.extent_miles) for _ in range(T)])
        for _i, j, t in mine:
            position[t] = spots[j]
        trucks.append(TruckProfile(tid, stop.astype(float), miles * KWH_PER_MILE,
                                   float(miles.sum() * DIESEL_KG_PER_MILE), position))

    subs = []
    for k in range(spec.n_substations):
        lon, lat = _offset(rng, spec.extent_miles * 1.5)
        subs.append(SubstationNode(f"K{k:03d}", lon, lat, float(rng.uniform(*spec.capacity_kw))))
    edges = nearest_substations(stations, subs, spec.k_nearest)
    access = AccessMatrix(tuple(triples), tuple(edges), spec.k_nearest)
    return Instance(grid, tuple(trucks), tuple(stations), tuple(subs), access, params, CostBook())


def binary_count(inst: Instance, mode: int = 2) -> int:
    """Upper bound on the integer variables of the base model that are not fixed by bounds."""
    A = len(inst.access.truck_station)
    E = len(inst.access.station_substation)
    K = 0 if mode == 1 else inst.n_substations
    return inst.n_trucks + A + inst.n_stations + E + K
