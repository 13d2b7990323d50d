"""Cheapest way to reach growing fleet targets, year by year.

Mode 2 minimizes annualized cost subject to a fleet target. Solving the
years in order while keeping every asset already bought shows how the plan
grows: new trucks reuse earlier stations, and upgrades appear only when
hosting capacity runs out.

Run: python demos/02_fleet_targets.py
"""

from drayplan.fixtures import load_fixture
from drayplan.scenario import run_years


def main():
    inst = load_fixture("tight_a")
    reports = run_years(inst, {2026: 1, 2028: 2, 2030: 3})
    print("year  target  status      trucks  stations  upgrades   C_total USD/yr   GHG kg/day")
    for year, r in reports.items():
        stations = sum(s.deployed for s in r.stations)
        upgrades = sum(k.upgraded for k in r.substations)
        print(f"{year}  {r.target:6d}  {r.status:10s}  {len(r.electrified):6d}  {stations:8d}  {upgrades:8d}"
              f"  {r.costs.get('C_total', float('nan')):15,.0f}  {r.ghg_kg:11.1f}")
    final = reports[2030]
    print("\nbatteries chosen (kWh):", {k: round(v, 1) for k, v in final.batteries.items()})


if __name__ == "__main__":
    main()
