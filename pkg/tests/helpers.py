"""Hand-built instances with known answers."""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

from drayplan.costs import CostBook
from drayplan.model import ModelIR
from drayplan.domain import AccessMatrix, GridParams, Instance, StationSite, SubstationNode, TimeGrid, TruckProfile

LON, LAT = -118.2, 33.8


def make_instance(trucks: Sequence[Tuple[Sequence[float], Sequence[float], float]],
                  n_stations: int = 1, capacities: Sequence[float] = (1000.0,),
                  triples: Sequence[Tuple[int, int, int]] = (), edges=None,
                  step_hours: float = 6.0, carbon: float = 0.25, **params) -> Instance:
    """``trucks`` holds ``(stop_fraction, consumption, diesel_kg)`` per truck.

    Stations are public truck stops. Without ``edges`` every station links
    to every substation at one mile.
    """
    T = len(trucks[0][0]) if trucks else 4
    grid = TimeGrid(T, step_hours)
    profiles = tuple(TruckProfile(f"T{i}", s, c, u) for i, (s, c, u) in enumerate(trucks))
    stations = tuple(StationSite(f"S{j}", "truck-stop", LON + 0.01 * j, LAT) for j in range(n_stations))
    subs = tuple(SubstationNode(f"K{k}", LON, LAT + 0.01 * k, cap) for k, cap in enumerate(capacities))
    if edges is None:
        edges = tuple((j, k, 1.0) for j in range(n_stations) for k in range(len(capacities)))
    access = AccessMatrix(tuple(triples), tuple(edges))
    gp = GridParams.default(grid, carbon_intensity=carbon, **params)
    return Instance(grid, profiles, stations, subs, access, gp, CostBook())


def peak_power(energy_kwh: float, inst: Instance, stop: float = 1.0) -> float:
    """Power a truck needs to put ``energy_kwh`` into its battery within one step."""
    eta = np.sqrt(inst.params.kappa)
    return energy_kwh / (eta * stop * inst.grid.step_hours)


def three_truck_single_window(capacity_factor: float) -> Instance:
    """Three identical trucks that can only charge at step 0 at one station.

    Each needs 100 kWh per day, so each must draw the same peak power in
    that step; hosting capacity is ``capacity_factor`` peaks.
    """
    truck = ((1.0, 0.0, 0.0, 0.0), (0.0, 40.0, 60.0, 0.0), 50.0)
    inst = make_instance([truck] * 3, triples=[(i, 0, 0) for i in range(3)])
    cap = capacity_factor * peak_power(100.0, inst)
    return inst.replace(substations=(SubstationNode("K0", LON, LAT, cap),))


def random_model(rng) -> ModelIR:
    """Small mixed-integer model with mixed senses, bounds, sense and constant."""
    n, m = int(rng.integers(2, 7)), int(rng.integers(1, 5))
    A = rng.integers(-4, 6, size=(m, n)) * rng.choice([1.0, 0.5, 0.25], size=(m, n))
    A[0] = np.abs(A[0]) + 1
    senses = ["<="] + list(rng.choice(["<=", ">=", "="], size=m - 1))
    x0 = rng.integers(0, 3, size=n).astype(float)
    b = A @ x0 + np.where(np.array(senses) == "<=", 1.5, np.where(np.array(senses) == ">=", -1.5, 0.0))
    integer = rng.random(n) < 0.5
    lb = np.where(rng.random(n) < 0.2, -2.0, 0.0)
    ub = np.where(integer, 3.0, np.where(rng.random(n) < 0.5, 6.0, np.inf))
    c = rng.integers(-5, 6, size=n) * 0.5
    return ModelIR.from_arrays(c, A, senses, b, lb, ub, integer=integer,
                               maximize=bool(rng.random() < 0.5), constant=float(rng.integers(0, 3)))
