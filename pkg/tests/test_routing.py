"""Routing algorithms and channel-dependency deadlock analysis."""

import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nocsim import addressing, routing, topology as topo
from nocsim.errors import (
    BudgetExceeded,
    CoordinateAliasing,
    Unreachable,
    WrongTopologyKind,
)


def random_connected_topology(rng, max_nodes=32):
    """Seeded connected random graph (spanning tree plus extra edges)."""
    n = rng.randint(4, max_nodes)
    adj = [set() for _ in range(n)]
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        a, b = order[i], order[rng.randrange(i)]
        adj[a].add(b)
        adj[b].add(a)
    extra = rng.randint(0, n)
    for _ in range(extra):
        a, b = rng.randrange(n), rng.randrange(n)
        if a != b:
            adj[a].add(b)
            adj[b].add(a)
    return topo.Topology([sorted(s) for s in adj])


def assert_valid_route(view, route, src, dst):
    assert route[0] == src and route[-1] == dst
    assert len(set(route)) == len(route)  # loop-free
    for a, b in zip(route, route[1:]):
        assert view.has_link(a, b)


# -- dimension-order XY ------------------------------------------------------

def test_route_xy_mesh_shape():
    t = topo.mesh(4, 4)
    # (0,0) -> (2,1): X first, then Y
    assert routing.route_xy(t, 0, 6) == (0, 1, 2, 6)


def test_route_xy_hop_count_is_manhattan_mesh_and_torus():
    for t in (topo.mesh(8, 8), topo.torus(6, 6)):
        for src in range(t.node_count):
            for dst in range(t.node_count):
                route = routing.route_xy(t, src, dst)
                assert len(route) - 1 == routing.grid_distance(t, src, dst)
                assert_valid_route(topo.TopologyView(t), route, src, dst)


def test_route_xy_torus_takes_wrap_shortcut():
    t = topo.torus(6, 6)
    assert routing.route_xy(t, 0, 5) == (0, 5)  # 1 hop around, not 5 across


def test_route_xy_torus_tie_goes_positive():
    t = topo.torus(4, 4)
    # x distance 2 either way: positive direction wins
    assert routing.route_xy(t, 0, 2) == (0, 1, 2)


def test_route_xy_wrong_kind():
    with pytest.raises(WrongTopologyKind):
        routing.route_xy(topo.ring(6), 0, 3)


# -- DyXY --------------------------------------------------------------------

def test_dyxy_arrived():
    t = topo.mesh(4, 4)
    assert routing.next_hop_dyxy(t, 5, 5, {}) is routing.ARRIVED


def test_dyxy_always_minimal():
    t = topo.mesh(5, 5)
    rng = random.Random(3)
    for _ in range(300):
        src, dst = rng.randrange(25), rng.randrange(25)
        if src == dst:
            continue
        occ = {v: rng.randint(0, 8) for v in t.neighbors(src)}
        d = routing.next_hop_dyxy(t, src, dst, occ)
        assert d.kind == "forward"
        assert routing.grid_distance(t, d.node, dst) == \
            routing.grid_distance(t, src, dst) - 1


def test_dyxy_prefers_less_congested_ties_to_x():
    t = topo.mesh(4, 4)
    # from (0,0) to (1,1): X neighbor is 1, Y neighbor is 4
    assert routing.next_hop_dyxy(t, 0, 5, {1: 3, 4: 1}).node == 4
    assert routing.next_hop_dyxy(t, 0, 5, {1: 1, 4: 3}).node == 1
    assert routing.next_hop_dyxy(t, 0, 5, {1: 2, 4: 2}).node == 1  # tie -> X


def test_dyxy_wrong_kind():
    with pytest.raises(WrongTopologyKind):
        routing.next_hop_dyxy(topo.torus(4, 4), 0, 5, {})


# -- greedy advance ----------------------------------------------------------

def corner_coords(t):
    return addressing.assign_virtual_coordinates(
        t, addressing.default_anchors(t, 3)
    )


def test_greedy_arrived():
    t = topo.mesh(3, 3)
    cmap = corner_coords(t)
    view = topo.TopologyView(t)
    assert routing.next_hop_greedy(cmap, 4, 4, view.alive_neighbors(4)) \
        is routing.ARRIVED


def test_greedy_forward_strictly_decreases_distance():
    t = topo.mesh(5, 5)
    cmap = corner_coords(t)
    view = topo.TopologyView(t)
    for src in range(25):
        for dst in range(25):
            if src == dst:
                continue
            d = routing.next_hop_greedy(cmap, src, dst, view.alive_neighbors(src))
            if d.kind != "forward":
                continue
            assert addressing.coordinate_distance(
                cmap.coord(d.node), cmap.coord(dst)
            ) < addressing.coordinate_distance(cmap.coord(src), cmap.coord(dst))


def test_greedy_tie_breaks_to_lowest_port():
    t = topo.ring(8)
    cmap = addressing.assign_virtual_coordinates(t, (0, 4))
    view = topo.TopologyView(t)
    # from 0 to 4 both neighbors (1 and 7) are symmetric; port 0 is node 1
    d = routing.next_hop_greedy(cmap, 0, 4, view.alive_neighbors(0))
    assert d.port == 0 and d.node == t.neighbors(0)[0]


def test_greedy_coordinate_aliasing_on_ring():
    # one anchor on a 6-ring: nodes 2 and 4 share coordinate (2,)
    t = topo.ring(6)
    cmap = addressing.assign_virtual_coordinates(t, (0,))
    view = topo.TopologyView(t)
    assert cmap.coord(4) == cmap.coord(2)
    with pytest.raises(CoordinateAliasing):
        routing.next_hop_greedy(cmap, 4, 2, view.alive_neighbors(4))


OBSTACLE_NODES = (7, 12, 17)  # column x=2, rows y=1..3 of mesh(5,5)


def obstacle_case():
    t = topo.mesh(5, 5)
    cmap = corner_coords(t)
    view = topo.TopologyView(t, failed_nodes=OBSTACLE_NODES)
    return t, cmap, view


def test_greedy_walk_hits_local_minimum_behind_obstacle():
    """Pure greedy from (1,2) to (3,2) stalls against the concave wall."""
    t, cmap, view = obstacle_case()
    src, dst = t.xy_node(1, 2), t.xy_node(3, 2)
    node = src
    seen = [node]
    while True:
        d = routing.next_hop_greedy(cmap, node, dst, view.alive_neighbors(node))
        if d.kind != "forward":
            break
        node = d.node
        seen.append(node)
        assert len(seen) <= 25
    assert d is routing.LOCAL_MINIMUM
    assert node != dst
    # every alive neighbor of the stuck node is at non-smaller distance
    here = addressing.coordinate_distance(cmap.coord(node), cmap.coord(dst))
    for _, v in view.alive_neighbors(node):
        assert addressing.coordinate_distance(cmap.coord(v), cmap.coord(dst)) >= here


# -- neighborhood method -----------------------------------------------------

def test_neighborhood_routes_mesh_counts():
    t = topo.mesh(4, 4)
    routes = routing.neighborhood_routes(t, 0, 15)
    # all monotone staircase paths on a 3+3 grid walk: C(6,3)
    assert len(routes) == 20
    for r in routes:
        assert_valid_route(topo.TopologyView(t), r, 0, 15)
        assert len(r) - 1 == 6


def test_neighborhood_routes_respect_faults():
    t = topo.mesh(3, 3)
    view = topo.TopologyView(t, failed_nodes=(4,))
    routes = routing.neighborhood_routes(view, 0, 8)
    assert routes == routing.all_shortest_paths_oracle(view, 0, 8)
    for r in routes:
        assert 4 not in r


def test_neighborhood_routes_directed_fault():
    t = topo.ring(4)
    view = topo.TopologyView(t, failed_links=((0, 1),))
    routes = routing.neighborhood_routes(view, 0, 1)
    assert routes == {(0, 3, 2, 1)}


def test_neighborhood_unreachable():
    t = topo.ring(6)
    view = topo.TopologyView(t, failed_nodes=(1, 5))
    with pytest.raises(Unreachable):
        routing.neighborhood_routes(view, 0, 3)
    with pytest.raises(Unreachable):
        routing.all_shortest_paths_oracle(view, 0, 3)


def test_neighborhood_budget_exceeded():
    t = topo.mesh(5, 5)
    with pytest.raises(BudgetExceeded):
        routing.neighborhood_routes(t, 0, 24, budget=10)


def test_neighborhood_matches_oracle_on_random_graphs():
    rng = random.Random(2024)
    for _ in range(40):
        t = random_connected_topology(rng)
        src = rng.randrange(t.node_count)
        dst = rng.randrange(t.node_count)
        if src == dst:
            continue
        assert routing.neighborhood_routes(t, src, dst) == \
            routing.all_shortest_paths_oracle(t, src, dst)


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_neighborhood_oracle_property(seed):
    rng = random.Random(seed)
    t = random_connected_topology(rng, max_nodes=16)
    src, dst = 0, t.node_count - 1
    assert routing.neighborhood_routes(t, src, dst) == \
        routing.all_shortest_paths_oracle(t, src, dst)


# -- hierarchical routing ----------------------------------------------------

def test_hierarchical_route_trivial():
    t = topo.mesh(3, 3)
    amap = addressing.assign_hierarchical_addresses(t, (0,))
    assert routing.hierarchical_route(amap, 4, 4) == (4,)


def test_hierarchical_route_valid_and_bounded():
    t = topo.circulant(12, (1, 3))
    centers = addressing.default_anchors(t, 2)
    amap = addressing.assign_hierarchical_addresses(t, centers)
    view = topo.TopologyView(t)
    for src in range(12):
        for dst in range(12):
            if src == dst:
                continue
            route = routing.hierarchical_route(amap, src, dst)
            assert_valid_route(view, route, src, dst)
            # bounded by the best up-and-down trip over any center
            bound = min(
                amap.depth(src, ci) + amap.depth(dst, ci)
                for ci in range(len(centers))
            )
            assert len(route) - 1 <= bound


def test_hierarchical_truncates_at_common_ancestor():
    t = topo.mesh(4, 4)
    amap = addressing.assign_hierarchical_addresses(t, (0,))
    # 1 and 2 share tree node 1; the route never climbs to the center
    assert routing.hierarchical_route(amap, 2, 1) == (2, 1)


# -- greedy with fallback ----------------------------------------------------

def test_fallback_minimal_on_fault_free_mesh():
    t = topo.mesh(4, 4)
    cmap = corner_coords(t)
    view = topo.TopologyView(t)
    for src in range(16):
        for dst in range(16):
            if src == dst:
                continue
            route = routing.greedy_with_fallback(cmap, view, src, dst)
            assert_valid_route(view, route, src, dst)
            assert len(route) - 1 == routing.grid_distance(t, src, dst)


def test_fallback_routes_around_obstacle():
    t, cmap, view = obstacle_case()
    src, dst = t.xy_node(1, 2), t.xy_node(3, 2)
    route = routing.greedy_with_fallback(cmap, view, src, dst)
    assert_valid_route(view, route, src, dst)
    assert not any(n in OBSTACLE_NODES for n in route)
    # greedy prefix + BFS distance from the stuck node
    assert len(route) - 1 == view.bfs_distances(src)[dst]


def test_fallback_unreachable():
    t = topo.ring(6)
    view = topo.TopologyView(t, failed_nodes=(1, 5))
    cmap = addressing.assign_virtual_coordinates(t, (0, 3))
    with pytest.raises(Unreachable):
        routing.greedy_with_fallback(cmap, view, 0, 3)


def test_erase_loops():
    assert routing._erase_loops((0, 1, 2, 1, 3)) == (0, 1, 3)
    assert routing._erase_loops((0, 1, 2, 3)) == (0, 1, 2, 3)
    assert routing._erase_loops((5, 6, 5)) == (5,)


# -- channel dependency graph ------------------------------------------------

def test_cdg_xy_mesh_acyclic():
    cdg = routing.build_cdg(topo.mesh(4, 4), routing.xy_relation(topo.mesh(4, 4)))
    assert routing.is_deadlock_free(cdg)


def test_cdg_xy_edge_semantics():
    t = topo.mesh(3, 1)
    cdg = routing.build_cdg(t, routing.xy_relation(t))
    # a 1x3 line: the only dependencies chain left-to-right and right-to-left
    assert cdg.has_edge((0, 1, 0), (1, 2, 0))
    assert cdg.has_edge((2, 1, 0), (1, 0, 0))
    assert not cdg.has_edge((0, 1, 0), (1, 0, 0))  # no u-turns


def test_cdg_minimal_adaptive_cyclic_on_ring():
    t = topo.ring(4)
    cdg = routing.build_cdg(t, routing.minimal_adaptive_relation(t))
    assert not routing.is_deadlock_free(cdg)


def test_cdg_single_vc_torus_xy_cyclic():
    t = topo.torus(4, 4)
    cdg = routing.build_cdg(t, routing.xy_relation(t), vc_count=1)
    assert not routing.is_deadlock_free(cdg)


def test_cdg_torus_dateline_two_vcs_acyclic():
    t = topo.torus(4, 4)
    cdg = routing.build_cdg(
        t, routing.torus_xy_dateline_relation(t, 2), vc_count=2
    )
    assert routing.is_deadlock_free(cdg)


def test_torus_xy_next_crosses_dateline_to_vc1():
    t = topo.torus(4, 4)
    # 3 -> 0 crosses the x wrap link
    nxt, vc = routing.torus_xy_next(t, 3, 1, None, None)
    assert (nxt, vc) == (0, 1)
    # interior hop stays on VC 0
    nxt, vc = routing.torus_xy_next(t, 0, 2, None, None)
    assert (nxt, vc) == (1, 0)


def test_torus_xy_next_resets_vc_on_dimension_switch():
    t = topo.torus(4, 4)
    # arrived on x VC 1, now turning into y: restart at VC 0
    nxt, vc = routing.torus_xy_next(t, 0, 4, 1, 3)
    assert (nxt, vc) == (4, 0)


def test_dyxy_relation_matches_zero_congestion_projection():
    t = topo.mesh(4, 4)
    rel_dyxy = routing.dyxy_relation(t)
    rel_xy = routing.xy_relation(t)
    for src in range(16):
        for dst in range(16):
            if src == dst:
                continue
            assert rel_dyxy(src, dst, None, None) == rel_xy(src, dst, None, None)


def test_cdg_nodes_cover_all_directed_links():
    t = topo.mesh(3, 3)
    cdg = routing.build_cdg(t, routing.xy_relation(t))
    expected = {(u, v, 0) for u, v, _ in t.links}
    assert set(cdg.nodes) == expected
