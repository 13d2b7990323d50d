"""Independent reference computations used across the test suite.

Nothing here imports the code under test except plain data types, so a
bug in the package cannot leak into its own oracle.
"""

from __future__ import annotations

import itertools
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np


# ---------------------------------------------------------------------- LP vertex oracle


def random_standard_lp(rng: np.random.Generator, n: int, m: int):
    """A feasible, bounded LP ``min c x`` over ``x >= 0`` with mixed row senses.

    Rows are built around a known feasible point. The first row is a
    ``sum(x) <= U`` cap, so every objective has a finite optimum.
    """
    x0 = rng.uniform(0.0, 2.0, size=n)
    A = rng.uniform(-1.0, 1.0, size=(m, n)).round(3)
    A[0] = 1.0
    senses = ["<="] + list(rng.choice(["<=", ">=", "="], size=m - 1, p=[0.5, 0.3, 0.2]))
    act = A @ x0
    slack = rng.uniform(0.1, 1.0, size=m).round(3)
    b = np.where(np.array(senses) == "<=", act + slack, np.where(np.array(senses) == ">=", act - slack, act))
    c = rng.uniform(-1.0, 1.0, size=n).round(3)
    return c, A, senses, b


def vertex_enumeration_lp(c, A, senses, b, tol: float = 1e-9) -> float:
    """Minimum of ``c x`` over ``{x >= 0, rows}`` by enumerating every basic solution.

    Each inequality gets a slack column (``+s`` for ``<=``, ``-s`` for
    ``>=``) so the system reads ``[A | S] z = b, z >= 0``. Every choice of
    ``m`` columns with a nonsingular basis gives a basic solution; the
    optimum of a feasible bounded LP is attained at one of the feasible ones.
    """
    A = np.asarray(A, float)
    m, n = A.shape
    cols = [A]
    for r, s in enumerate(senses):
        if s != "=":
            e = np.zeros((m, 1))
            e[r, 0] = 1.0 if s == "<=" else -1.0
            cols.append(e)
    full = np.hstack(cols)
    cost = np.concatenate([np.asarray(c, float), np.zeros(full.shape[1] - n)])
    bases = np.array(list(itertools.combinations(range(full.shape[1]), m)))
    B = full[:, bases].transpose(1, 0, 2)  # (k, m, m)
    det = np.linalg.det(B)
    ok = np.abs(det) > 1e-10
    B, bases = B[ok], bases[ok]
    z = np.linalg.solve(B, np.broadcast_to(b, (len(B), m))[..., None])[..., 0]
    feasible = np.all(z >= -tol, axis=1)
    # guard against near-singular bases that solve() let through
    resid = np.abs(np.einsum("kij,kj->ki", B, z) - b).max(axis=1)
    feasible &= resid < 1e-7
    if not feasible.any():
        return math.inf
    values = np.einsum("kj,kj->k", cost[bases[feasible]], z[feasible])
    return float(values.min())


# --------------------------------------------------------------------- union-find oracle


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def haversine_reference(lon1, lat1, lon2, lat2, radius_miles: float = 3958.7613) -> float:
    """Great-circle distance written out longhand, in miles."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * radius_miles * math.asin(math.sqrt(h))


def eps_graph_clusters(points: Sequence[Tuple[str, float, float]], radius_miles: float) -> List[frozenset]:
    """Connected components of the graph joining points closer than ``radius_miles``."""
    uf = UnionFind(len(points))
    for a, b in itertools.combinations(range(len(points)), 2):
        if haversine_reference(points[a][1], points[a][2], points[b][1], points[b][2]) <= radius_miles:
            uf.union(a, b)
    groups: Dict[int, set] = {}
    for k, p in enumerate(points):
        groups.setdefault(uf.find(k), set()).add(p[0])
    return sorted((frozenset(g) for g in groups.values()), key=lambda g: sorted(g))


# ----------------------------------------------------------------- geometry for pipeline


def offset(lon: float, lat: float, east_miles: float = 0.0, north_miles: float = 0.0) -> Tuple[float, float]:
    """Point ``east_miles``/``north_miles`` away on a local flat-earth approximation.

    Northward moves are exact great-circle arcs on the sphere of radius
    3958.7613 miles; eastward moves are exact along the parallel.
    """
    radius = 3958.7613
    dlat = math.degrees(north_miles / radius)
    dlon = math.degrees(east_miles / (radius * math.cos(math.radians(lat))))
    return lon + dlon, lat + dlat


def straight_trace(t0: float, minutes: Sequence[float], miles_per_segment: Sequence[float],
                   lon: float = -118.2, lat: float = 33.8):
    """Times (s) and positions of a truck driving due north ``miles_per_segment[k]`` in segment k."""
    times = [t0]
    lons, lats = [lon], [lat]
    for dur, miles in zip(minutes, miles_per_segment):
        times.append(times[-1] + dur * 60.0)
        nl, nt = offset(lons[-1], lats[-1], 0.0, miles)
        lons.append(nl)
        lats.append(nt)
    return times, lons, lats


# ------------------------------------------------------------------ solution invariants


def plan_invariants(inst, sol, tol: float = 1e-6, options=None) -> Dict[str, float]:
    """Largest violation of each planning invariant for a solved base model.

    Written from the model's physical meaning rather than its constraint
    list: energy must telescope around the day, one station per truck and
    step, no station switch within a parked session, loads within capacity,
    substation flows within hosting plus upgrade, and the upgrade identity.
    """
    from drayplan.domain import derive_subsets

    P, grid = inst.params, inst.grid
    T, dt = grid.step_count, grid.step_hours
    eta = math.sqrt(P.kappa) if options is None else options.eta(P.kappa)
    sub = derive_subsets(inst.access)
    v = sol.get
    worst = {k: 0.0 for k in ("energy_cycle", "one_station", "session", "station_load",
                              "substation_flow", "upgrade_identity")}
    for i, tr in enumerate(inst.trucks):
        x = v(f"x[{i}]")
        charged = sum(eta * v(f"p[{i},{t}]") * tr.stop_fraction[t] * dt for t in range(T))
        used = x * float(np.sum(tr.consumption))
        worst["energy_cycle"] = max(worst["energy_cycle"], abs(charged - used) * (x > 0.5))
        for t in range(T):
            on = [j for j in sub.stations_of(i, t) if v(f"phat[{i},{j},{t}]") > 0.5]
            worst["one_station"] = max(worst["one_station"], len(on) - 1.0)
            nxt = grid.next(t)
            after = [j for j in sub.stations_of(i, nxt) if v(f"phat[{i},{j},{nxt}]") > 0.5]
            # a session continues while the truck stays parked at a station it could use
            for j in on:
                if j in sub.stations_of(i, nxt) and after and j not in after:
                    worst["session"] = max(worst["session"], 1.0)
            # power may flow only through the chosen station
            for j in sub.stations_of(i, t):
                if j not in on:
                    worst["one_station"] = max(worst["one_station"], v(f"ptrk[{i},{j},{t}]") - tol)
    for j in range(inst.n_stations):
        cap = v(f"Pchs[{j}]")
        for t in range(T):
            load = sum(v(f"ptrk[{i},{j},{t}]") for i in sub.trucks_at(j, t))
            worst["station_load"] = max(worst["station_load"], load - cap)
    for k, node in enumerate(inst.substations):
        flow = sum(v(f"flow[{j},{kk}]") for j, kk, _ in inst.access.station_substation if kk == k)
        worst["substation_flow"] = max(worst["substation_flow"],
                                       flow - node.remaining_capacity - v(f"Pupg[{k}]"))
        identity = v(f"Pupg[{k}]") - (P.p_upg_std * P.pf * v(f"Pupg_on[{k}]") + v(f"Pupg_var[{k}]"))
        worst["upgrade_identity"] = max(worst["upgrade_identity"], abs(identity))
    return worst
