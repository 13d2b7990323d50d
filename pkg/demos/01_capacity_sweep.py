"""How many trucks can go electric on today's grid?

Mode 1 maximizes the electrified fleet with no substation upgrades. Running
it at 20%, 50% and 100% of each substation's hosting capacity shows how
quickly spare grid capacity becomes the bottleneck.

Run: python demos/01_capacity_sweep.py
"""

from drayplan.fixtures import list_fixtures, load_fixture
from drayplan.scenario import capacity_sweep


def main():
    print("fixture   trucks   hosting kW   max electrified at 20% / 50% / 100%")
    for name in list_fixtures():
        inst = load_fixture(name)
        hosting = sum(k.remaining_capacity for k in inst.substations)
        reports = capacity_sweep(inst, (0.2, 0.5, 1.0))
        counts = " / ".join(str(r.max_trucks) for r in reports.values())
        print(f"{name:9s} {inst.n_trucks:6d} {hosting:12.1f}   {counts}")
    print("\nEach row is nondecreasing: more hosting capacity never strands a truck.")


if __name__ == "__main__":
    main()
