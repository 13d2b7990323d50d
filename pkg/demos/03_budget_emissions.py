"""Emissions you can buy down with a given annual budget.

Mode 3 minimizes daily CO2 within an annual budget. Sweeping the budget
traces a step-shaped frontier: each step is one more truck (with its share
of charging and grid assets) becoming affordable.

The plain Mode 3 objective is indifferent to cost once emissions are
minimal, so a plan may spend part of the budget on idle assets. The
"cheapest" column reruns each budget with the cost tie-break stage, which
keeps the emission optimum and buys only what it needs.

Run: python demos/03_budget_emissions.py
"""

import math

from drayplan.fixtures import load_fixture
from drayplan.scenario import run_mode3


def main():
    inst = load_fixture("tight_c")
    diesel = sum(tr.diesel_emission for tr in inst.trucks)
    print(f"all-diesel emissions: {diesel:.1f} kg CO2/day\n")
    print("budget USD/yr   GHG kg/day   electrified   spent USD/yr   cheapest USD/yr")
    for budget in (0, 2e5, 4e5, 6e5, 8e5, 1e6, math.inf):
        r = run_mode3(inst, budget)
        lean = run_mode3(inst, budget, cheapest=True)
        print(f"{budget:13,.0f}   {r.objective:10.1f}   {len(r.electrified):11d}   "
              f"{r.costs['C_total']:12,.0f}   {lean.costs['C_total']:15,.0f}")


if __name__ == "__main__":
    main()
