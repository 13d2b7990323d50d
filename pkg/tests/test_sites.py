import itertools

import numpy as np
import pytest

from drayplan.domain import StationSite, SubstationNode, TruckProfile
from drayplan.geo import haversine_miles
from drayplan.pipeline import build_access_matrix, cluster_depots, nearest_substations, trucks_without_access

from oracles import eps_graph_clusters, haversine_reference, offset

LON, LAT = -118.2, 33.8


def parked_truck(tid, lon, lat, T=4, stop_steps=(1, 2)):
    stop = np.zeros(T)
    stop[list(stop_steps)] = 1.0
    return TruckProfile(tid, stop, np.where(stop > 0, 0.0, 5.0), 1.0, np.tile([lon, lat], (T, 1)))


def test_two_trucks_500_feet_apart_share_a_depot():
    b = offset(LON, LAT, east_miles=500 / 5280)
    (depot,) = cluster_depots([("A", LON, LAT), ("B", *b)])
    assert depot.owners == frozenset({"A", "B"}) and depot.kind == "depot"


def test_two_trucks_2000_feet_apart_get_two_depots():
    b = offset(LON, LAT, east_miles=2000 / 5280)
    depots = cluster_depots([("A", LON, LAT), ("B", *b)])
    assert [d.owners for d in depots] == [frozenset({"A"}), frozenset({"B"})]


@pytest.mark.parametrize("seed", range(8))
def test_clusters_match_union_find_reference(seed):
    rng = np.random.default_rng(seed)
    points = []
    for k in range(10):
        east, north = rng.uniform(0, 0.6, size=2)
        points.append((f"T{k}", *offset(LON, LAT, east, north)))
    radius_ft = 1000.0
    want = eps_graph_clusters(points, radius_ft / 5280)
    got = sorted((d.owners for d in cluster_depots(points, radius_ft)), key=lambda g: sorted(g))
    assert got == want


def test_chain_of_points_forms_one_cluster():
    points = [(f"T{k}", *offset(LON, LAT, east_miles=k * 800 / 5280)) for k in range(6)]
    assert len(cluster_depots(points, 1000.0)) == 1


def test_clustering_is_permutation_invariant():
    rng = np.random.default_rng(3)
    points = [(f"T{k}", *offset(LON, LAT, *rng.uniform(0, 0.5, size=2))) for k in range(9)]
    ref = cluster_depots(points)
    for perm in itertools.islice(itertools.permutations(points), 0, 200, 37):
        assert cluster_depots(list(perm)) == ref
    assert cluster_depots(points[::-1]) == ref


def test_parked_near_a_truck_stop_gets_access():
    site = StationSite("S0", "truck-stop", *offset(LON, LAT, east_miles=0.3))
    sub = SubstationNode("K0", LON, LAT, 100.0)
    access = build_access_matrix([parked_truck("A", LON, LAT)], [site], [sub])
    assert sorted(access.truck_station) == [(0, 0, 1), (0, 0, 2)]


def test_parked_near_another_fleets_depot_gets_none():
    depot = StationSite("D0", "depot", *offset(LON, LAT, east_miles=0.3), frozenset({"B"}))
    access = build_access_matrix([parked_truck("A", LON, LAT)], [depot], [])
    assert access.truck_station == ()
    assert trucks_without_access([parked_truck("A", LON, LAT)], access) == ["A"]
    own = build_access_matrix([parked_truck("B", LON, LAT)], [depot], [])
    assert len(own.truck_station) == 2


def test_access_only_during_qualified_stops():
    prof = parked_truck("A", LON, LAT, T=6, stop_steps=(0, 3))
    prof = TruckProfile("A", np.array([1.0, 0.4, 0.0, 0.5, 0.2, 0.0]), np.zeros(6), 1.0, prof.position)
    site = StationSite("S0", "truck-stop", LON, LAT)
    access = build_access_matrix([prof], [site], [])
    assert sorted(t for _i, _j, t in access.truck_station) == [0, 3]
    assert all(prof.stop_fraction[t] > 0 for _i, _j, t in access.truck_station)


def test_substation_distances_match_reference():
    sites = [StationSite(f"S{j}", "truck-stop", *offset(LON, LAT, j * 1.5, j * 0.7)) for j in range(3)]
    subs = [SubstationNode(f"K{k}", *offset(LON, LAT, -1.0 + 3 * k, 2.0), 1000.0) for k in range(2)]
    edges = nearest_substations(sites, subs, k_nearest=2)
    assert len(edges) == 6
    for j, k, d in edges:
        ref = haversine_reference(sites[j].lon, sites[j].lat, subs[k].lon, subs[k].lat)
        assert d == pytest.approx(ref, rel=1e-3)


def test_haversine_known_distance():
    # one degree of latitude along a meridian
    assert haversine_miles(0.0, 0.0, 0.0, 1.0) == pytest.approx(2 * np.pi * 3958.7613 / 360, rel=1e-12)
