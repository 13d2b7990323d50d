"""CSV inputs to an :class:`Instance`.

Expected files (header row required)::

    traces.csv       truck_id,timestamp_iso8601,lon,lat
    sites.csv        id,kind,lon,lat
    substations.csv  id,lon,lat,capacity_kw

Sites listed in ``sites.csv`` are public; depots are derived from each
truck's longest qualified stop.
"""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, time as dtime
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..costs import CostBook
from ..domain import GridParams, Instance, StationSite, SubstationNode, TimeGrid, TruckProfile
from .sites import ACCESS_RADIUS_MI, DEPOT_RADIUS_FT, K_NEAREST, build_access_matrix, cluster_depots, trucks_without_access
from .traces import KWH_PER_MILE, STOP_MINUTES, STOP_SPEED_MPH, RawTrace, classify_stops, downsample

log = logging.getLogger(__name__)
PathLike = Union[str, Path]


def _rows(path: PathLike, required: Sequence[str]) -> List[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in required if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing column(s) {', '.join(missing)}")
        return list(reader)


def read_traces(path: PathLike) -> List[RawTrace]:
    """One :class:`RawTrace` per truck, samples sorted by time, trucks sorted by id."""
    by_truck: Dict[str, List[Tuple[float, float, float]]] = defaultdict(list)
    for row in _rows(path, ("truck_id", "timestamp_iso8601", "lon", "lat")):
        ts = datetime.fromisoformat(row["timestamp_iso8601"]).timestamp()
        by_truck[row["truck_id"]].append((ts, float(row["lon"]), float(row["lat"])))
    out = []
    for tid in sorted(by_truck):
        samples = sorted(by_truck[tid])
        out.append(RawTrace(tid, [s[0] for s in samples], [s[1] for s in samples], [s[2] for s in samples]))
    return out


def read_sites(path: PathLike) -> List[StationSite]:
    return [StationSite(r["id"], r["kind"], float(r["lon"]), float(r["lat"]))
            for r in _rows(path, ("id", "kind", "lon", "lat"))]


def read_substations(path: PathLike) -> List[SubstationNode]:
    return [SubstationNode(r["id"], float(r["lon"]), float(r["lat"]), float(r["capacity_kw"]))
            for r in _rows(path, ("id", "lon", "lat", "capacity_kw"))]


@dataclass
class IngestReport:
    instance: Instance
    trucks_without_stops: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def share_without_stops(self) -> float:
        n = self.instance.n_trucks
        return len(self.trucks_without_stops) / n if n else 0.0


def _day_start(traces: Sequence[RawTrace]) -> float:
    first = min(float(tr.time[0]) for tr in traces)
    day = datetime.fromtimestamp(first).date()
    return datetime.combine(day, dtime()).timestamp()


def ingest(traces: Sequence[RawTrace], sites: Sequence[StationSite], substations: Sequence[SubstationNode],
           grid: TimeGrid = TimeGrid(96, 0.25), day_start: Optional[float] = None,
           speed_thresh: float = STOP_SPEED_MPH, min_duration: float = STOP_MINUTES,
           kwh_per_mile: float = KWH_PER_MILE, depot_radius_ft: float = DEPOT_RADIUS_FT,
           access_radius: float = ACCESS_RADIUS_MI, k_nearest: int = K_NEAREST,
           costs: CostBook = CostBook(), params: Optional[GridParams] = None) -> IngestReport:
    """Run stop detection, downsampling, depot clustering and access on raw inputs."""
    if not traces:
        raise ValueError("no traces to ingest")
    start = _day_start(traces) if day_start is None else day_start
    step_minutes = grid.step_hours * 60.0
    profiles: List[TruckProfile] = []
    candidates = []
    for tr in traces:
        labeled = classify_stops(tr, speed_thresh, min_duration, max_gap_minutes=step_minutes)
        profiles.append(downsample(labeled, grid, start, kwh_per_mile))
        spot = labeled.longest_stop()
        if spot is not None:
            candidates.append((tr.truck_id, spot[0], spot[1]))
    depots = cluster_depots(candidates, depot_radius_ft)
    all_sites = list(depots) + list(sites)
    access = build_access_matrix(profiles, all_sites, substations, access_radius, k_nearest)
    params = params or GridParams.default(grid)
    inst = Instance(grid, tuple(profiles), tuple(all_sites), tuple(substations), access, params, costs)
    lacking = trucks_without_access(profiles, access)
    if lacking:
        log.info("%d of %d trucks have no usable qualified stop", len(lacking), len(profiles))
    return IngestReport(inst, lacking)


def ingest_files(traces_csv: PathLike, sites_csv: PathLike, substations_csv: PathLike, **kwargs) -> IngestReport:
    return ingest(read_traces(traces_csv), read_sites(sites_csv), read_substations(substations_csv), **kwargs)
