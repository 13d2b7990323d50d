"""Depot detection and the truck-station-substation access structure."""

from __future__ import annotations

from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from sklearn.cluster import DBSCAN

from ..domain import AccessMatrix, StationSite, SubstationNode, TruckProfile
from ..geo import EARTH_RADIUS_MILES, feet_to_miles, haversine_miles

DEPOT_RADIUS_FT = 1000.0
ACCESS_RADIUS_MI = 0.5
K_NEAREST = 5
# a step counts as a qualified stop for access when most of it is stopped
STOP_SHARE_FOR_ACCESS = 0.5


def cluster_depots(points: Iterable[Tuple[str, float, float]], radius_ft: float = DEPOT_RADIUS_FT,
                   prefix: str = "depot") -> List[StationSite]:
    """Merge per-truck depot candidates that lie within ``radius_ft`` of each other.

    ``points`` holds ``(truck_id, lon, lat)``, normally each truck's longest
    stop. Clusters are the connected components of the radius graph
    (DBSCAN with one sample per core point). Each becomes a depot at the
    member centroid owned by the member trucks. Depots are numbered by
    their smallest owner id, so the result does not depend on input order.
    """
    pts = sorted(points)
    if not pts:
        return []
    ids = [p[0] for p in pts]
    coords = np.radians([[lat, lon] for _, lon, lat in pts])
    eps = feet_to_miles(radius_ft) / EARTH_RADIUS_MILES
    labels = DBSCAN(eps=eps, min_samples=1, metric="haversine").fit(coords).labels_
    groups: Dict[int, List[int]] = {}
    for idx, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(idx)
    members = sorted(groups.values(), key=lambda g: min(ids[i] for i in g))
    width = max(3, len(str(len(members))))
    out = []
    for n, g in enumerate(members):
        lon = float(np.mean([pts[i][1] for i in g]))
        lat = float(np.mean([pts[i][2] for i in g]))
        out.append(StationSite(f"{prefix}-{n:0{width}d}", "depot", lon, lat, frozenset(ids[i] for i in g)))
    return out


def nearest_substations(stations: Sequence[StationSite], substations: Sequence[SubstationNode],
                        k_nearest: int = K_NEAREST) -> List[Tuple[int, int, float]]:
    """``(j, k, miles)`` for the ``k_nearest`` substations of every station; ties by index."""
    if not substations:
        return []
    s_lon = np.array([s.lon for s in substations])
    s_lat = np.array([s.lat for s in substations])
    edges = []
    for j, st in enumerate(stations):
        d = np.asarray(haversine_miles(st.lon, st.lat, s_lon, s_lat), dtype=float)
        order = np.lexsort((np.arange(d.size), d))[:k_nearest]
        edges += [(j, int(k), float(d[k])) for k in order]
    return edges


def build_access_matrix(profiles: Sequence[TruckProfile], sites: Sequence[StationSite],
                        substations: Sequence[SubstationNode], access_radius: float = ACCESS_RADIUS_MI,
                        k_nearest: int = K_NEAREST,
                        stop_share: float = STOP_SHARE_FOR_ACCESS) -> AccessMatrix:
    """Truck i may charge at site j in step t when all of these hold.

    * at least ``stop_share`` of step t is a qualified stop,
    * the truck's step position lies within ``access_radius`` miles of j,
    * j is public, or j is a depot owned by truck i.
    """
    if not sites:
        return AccessMatrix((), (), k_nearest)
    lon = np.array([s.lon for s in sites])
    lat = np.array([s.lat for s in sites])
    public = np.array([s.public for s in sites])
    triples = []
    for i, prof in enumerate(profiles):
        if prof.position is None:
            raise ValueError(f"truck {prof.id} has no positions; access needs them")
        owned = np.array([prof.id in s.owners for s in sites])
        allowed = public | owned
        for t in np.flatnonzero(prof.stop_fraction >= stop_share):
            plon, plat = prof.position[t]
            d = np.asarray(haversine_miles(plon, plat, lon, lat), dtype=float)
            for j in np.flatnonzero((d <= access_radius) & allowed):
                triples.append((i, int(j), int(t)))
    edges = nearest_substations(sites, substations, k_nearest)
    return AccessMatrix(tuple(triples), tuple(edges), k_nearest)


def trucks_without_access(profiles: Sequence[TruckProfile], access: AccessMatrix) -> List[str]:
    """Ids of trucks that never have a usable qualified stop."""
    seen = {i for i, _j, _t in access.truck_station}
    return [p.id for i, p in enumerate(profiles) if i not in seen]
