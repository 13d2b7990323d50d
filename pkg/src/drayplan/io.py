"""Instance JSON documents (``"schema": 1``).

Access triples are stored with ids, not positions, so a document stays
readable and survives reordering of the entity lists.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .costs import CostBook
from .domain import (
    AccessMatrix,
    GridParams,
    Instance,
    StationSite,
    SubstationNode,
    TimeGrid,
    TruckProfile,
)

SCHEMA_VERSION = 1


def _floats(arr) -> list:
    return [float(x) for x in np.asarray(arr).ravel()]


def instance_to_dict(inst: Instance) -> dict:
    trucks = []
    for tr in inst.trucks:
        row = {
            "id": tr.id,
            "stop_fraction": _floats(tr.stop_fraction),
            "consumption": _floats(tr.consumption),
            "diesel_emission": tr.diesel_emission,
        }
        if tr.position is not None:
            row["position"] = [[float(a), float(b)] for a, b in tr.position]
        trucks.append(row)
    tid = [tr.id for tr in inst.trucks]
    sid = [s.id for s in inst.stations]
    kid = [k.id for k in inst.substations]
    return {
        "schema": SCHEMA_VERSION,
        "grid": {"step_count": inst.grid.step_count, "step_hours": inst.grid.step_hours},
        "trucks": trucks,
        "stations": [
            {"id": s.id, "kind": s.kind, "lon": s.lon, "lat": s.lat, "owners": sorted(s.owners)}
            for s in inst.stations
        ],
        "substations": [
            {"id": k.id, "lon": k.lon, "lat": k.lat, "remaining_capacity": k.remaining_capacity}
            for k in inst.substations
        ],
        "access": {
            "truck_station": [[tid[i], sid[j], t] for i, j, t in inst.access.truck_station],
            "station_substation": [[sid[j], kid[k], d] for j, k, d in inst.access.station_substation],
            "max_neighbors": inst.access.max_neighbors,
        },
        "params": {
            **inst.params.scalars(),
            "tou_price": _floats(inst.params.tou_price),
            "carbon_intensity": _floats(inst.params.carbon_intensity),
        },
        "costs": inst.costs.to_dict(),
    }


def instance_from_dict(data: dict) -> Instance:
    version = data.get("schema")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported instance schema {version!r}; expected {SCHEMA_VERSION}")
    grid = TimeGrid(int(data["grid"]["step_count"]), float(data["grid"]["step_hours"]))
    trucks = [
        TruckProfile(
            id=row["id"],
            stop_fraction=row["stop_fraction"],
            consumption=row["consumption"],
            diesel_emission=row["diesel_emission"],
            position=row.get("position"),
        )
        for row in data["trucks"]
    ]
    stations = [
        StationSite(row["id"], row["kind"], float(row["lon"]), float(row["lat"]), frozenset(row.get("owners", ())))
        for row in data["stations"]
    ]
    substations = [
        SubstationNode(row["id"], float(row["lon"]), float(row["lat"]), float(row["remaining_capacity"]))
        for row in data["substations"]
    ]
    tpos = {tr.id: i for i, tr in enumerate(trucks)}
    spos = {s.id: j for j, s in enumerate(stations)}
    kpos = {k.id: n for n, k in enumerate(substations)}
    acc = data["access"]
    try:
        triples = [(tpos[a], spos[b], int(t)) for a, b, t in acc["truck_station"]]
        edges = [(spos[a], kpos[b], float(d)) for a, b, d in acc["station_substation"]]
    except KeyError as exc:
        raise ValueError(f"access refers to unknown id {exc.args[0]!r}") from None
    access = AccessMatrix(tuple(triples), tuple(edges), int(acc.get("max_neighbors", 5)))
    p = dict(data["params"])
    params = GridParams(**p)
    costs = CostBook.from_dict(data["costs"]) if "costs" in data else CostBook()
    return Instance(grid, trucks, stations, substations, access, params, costs)


def save_instance(inst: Instance, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(instance_to_dict(inst), indent=1, sort_keys=True) + "\n")
    return path


def load_instance(path: Union[str, Path]) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text()))


def apply_config(inst: Instance, config: dict) -> Instance:
    """Override GridParams scalars and CostBook entries from a config mapping.

    ``{"params": {"kappa": 0.9}, "costs": {"interest_rate": 0.08, "veh": {"investment": 2e5}}}``
    """
    params = inst.params
    if "params" in config:
        fields = {**params.scalars(), "tou_price": params.tou_price, "carbon_intensity": params.carbon_intensity}
        unknown = set(config["params"]) - set(fields)
        if unknown:
            raise KeyError(f"unknown parameter(s): {sorted(unknown)}")
        fields.update(config["params"])
        params = GridParams(**fields)
    costs = inst.costs.with_overrides(config["costs"]) if "costs" in config else inst.costs
    return inst.replace(params=params, costs=costs)
