"""From raw GPS pings to a charging plan.

Builds a day of pings for three trucks that share a yard, ingests them
(stop detection, 3-hour downsampling, depot clustering, access matrix)
and solves a Mode 2 plan on the resulting instance.

Run: python demos/04_trace_pipeline.py
"""

import math
from datetime import datetime, timedelta

import numpy as np

from drayplan.domain import StationSite, SubstationNode, TimeGrid
from drayplan.pipeline import RawTrace, ingest
from drayplan.scenario import run_mode2
from drayplan.solver import SolverParams

YARD = (-118.22, 33.77)
PORT = (-118.26, 33.74)
DAY = datetime(2024, 3, 1)


def pings(tid, legs, seed):
    """Pings every 5 minutes along ``(minute, lon, lat)`` waypoints with a little GPS noise."""
    rng = np.random.default_rng(seed)
    times, lons, lats = [], [], []
    for (m0, x0, y0), (m1, x1, y1) in zip(legs, legs[1:]):
        for m in np.arange(m0, m1, 5.0):
            f = (m - m0) / (m1 - m0)
            times.append((DAY + timedelta(minutes=float(m))).timestamp())
            lons.append(x0 + f * (x1 - x0) + rng.normal(0, 1e-6))
            lats.append(y0 + f * (y1 - y0) + rng.normal(0, 1e-6))
    return RawTrace(tid, np.array(times), lons, lats)


def main():
    traces = []
    for k in range(3):
        yard = (YARD[0] + 0.0005 * k, YARD[1])
        start = 6 * 60 + 45 * k
        legs = [(0, *yard), (start, *yard), (start + 40, *PORT), (start + 160, *PORT),
                (start + 200, *yard), (start + 260, *yard), (start + 300, *PORT), (start + 420, *PORT),
                (start + 460, *yard), (24 * 60 - 1, *yard)]
        traces.append(pings(f"truck-{k}", legs, k))
    sites = [StationSite("port-stop", "truck-stop", *PORT)]
    subs = [SubstationNode("sub-yard", YARD[0] + 0.01, YARD[1], 600.0),
            SubstationNode("sub-port", PORT[0], PORT[1] - 0.01, 400.0)]
    rep = ingest(traces, sites, subs, grid=TimeGrid(8, 3.0))
    inst = rep.instance
    print(f"{inst.n_trucks} trucks, {inst.n_stations} candidate stations "
          f"({', '.join(s.id + ':' + s.kind for s in inst.stations)})")
    for tr in inst.trucks:
        print(f"  {tr.id}: {tr.consumption.sum():6.1f} kWh/day, stopped {tr.stop_fraction.sum() * inst.grid.step_hours:4.1f} h")
    print(f"  charging opportunities (truck, station, step): {len(inst.access.truck_station)}")
    report = run_mode2(inst, 2, SolverParams(branching="pseudo-cost"))
    print(f"\nMode 2 with target 2: {report.status}, {report.costs['C_total']:,.0f} USD/yr")
    for s in report.stations:
        if s.deployed:
            print(f"  {s.id}: {s.capacity_kw:.1f} kW on {s.substation}, utilization {s.utilization:.2f}")
    print(f"  electrified: {', '.join(report.electrified)}")


if __name__ == "__main__":
    main()
