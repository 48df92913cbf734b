"""Static virtual coordinates and hierarchical multi-center addresses.

Both maps are assigned once over the fault-free topology and never change,
mirroring an address system fixed at chip production time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    DimensionMismatch,
    Disconnected,
    DuplicateAnchor,
    EmptyAnchors,
    EmptyCenters,
    KTooLarge,
)


@dataclass(frozen=True)
class CoordinateMap:
    """Per-node hop-distance vectors to a fixed ordered anchor set."""

    anchors: tuple
    coords: tuple  # coords[node] = tuple of hop distances, one per anchor

    def coord(self, node):
        return self.coords[node]

    def dump(self):
        """One line per node: 'id: c1 c2 ... ck'."""
        lines = [
            f"{node}: " + " ".join(str(c) for c in vec)
            for node, vec in enumerate(self.coords)
        ]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class AddressMap:
    """Per-center BFS shortest-path trees.

    ``entries[node]`` holds one (parent_node, parent_port, depth) triple per
    center; the center itself has parent (None, None) at depth 0.
    """

    centers: tuple
    entries: tuple

    def parent(self, node, center_index):
        return self.entries[node][center_index][0]

    def depth(self, node, center_index):
        return self.entries[node][center_index][2]

    def path_to_center(self, node, center_index):
        """Node sequence from node up to the center (inclusive)."""
        path = [node]
        while True:
            p = self.entries[path[-1]][center_index][0]
            if p is None:
                return path
            path.append(p)


def assign_virtual_coordinates(topology, anchors):
    """Exact BFS hop distances to each anchor, in anchor order."""
    anchors = tuple(anchors)
    if not anchors:
        raise EmptyAnchors("need at least one anchor")
    if len(set(anchors)) != len(anchors):
        raise DuplicateAnchor(f"anchors {anchors} contain duplicates")
    per_anchor = []
    for a in anchors:
        dist = topology.bfs_distances(a)
        if -1 in dist:
            raise Disconnected(f"node {dist.index(-1)} unreachable from anchor {a}")
        per_anchor.append(dist)
    coords = tuple(
        tuple(per_anchor[i][node] for i in range(len(anchors)))
        for node in range(topology.node_count)
    )
    return CoordinateMap(anchors, coords)


def default_anchors(topology, k):
    """Deterministic farthest-point sampling seeded at node 0.

    Each next anchor maximizes the minimum hop distance to the chosen set;
    ties break toward the lowest node id. Anchors for k are a prefix of
    anchors for k+1.
    """
    n = topology.node_count
    if not 1 <= k <= n:
        raise KTooLarge(f"k={k} outside 1..{n}")
    anchors = [0]
    min_dist = topology.bfs_distances(0)
    while len(anchors) < k:
        best = max(range(n), key=lambda u: (min_dist[u], -u))
        anchors.append(best)
        d = topology.bfs_distances(best)
        min_dist = [min(a, b) for a, b in zip(min_dist, d)]
    return tuple(anchors)


def coordinate_distance(coord_u, coord_v, metric="euclidean"):
    """Distance between two coordinate vectors; Euclidean by default."""
    if len(coord_u) != len(coord_v):
        raise DimensionMismatch(f"{len(coord_u)} vs {len(coord_v)} components")
    if metric == "euclidean":
        return math.dist(coord_u, coord_v)
    if metric == "l1":
        return float(sum(abs(a - b) for a, b in zip(coord_u, coord_v)))
    raise ValueError(f"unknown metric {metric!r}")


def assign_hierarchical_addresses(topology, centers):
    """One BFS shortest-path tree per center; parents tie-break to the
    lowest neighbor id, so the map is deterministic."""
    centers = tuple(centers)
    if not centers:
        raise EmptyCenters("need at least one center")
    if len(set(centers)) != len(centers):
        raise DuplicateAnchor(f"centers {centers} contain duplicates")
    n = topology.node_count
    trees = []
    for c in centers:
        dist = topology.bfs_distances(c)
        if -1 in dist:
            raise Disconnected(f"node {dist.index(-1)} unreachable from center {c}")
        tree = []
        for node in range(n):
            if node == c:
                tree.append((None, None, 0))
                continue
            parent = min(
                v for v in topology.neighbors(node) if dist[v] == dist[node] - 1
            )
            tree.append((parent, topology.port_to(node, parent), dist[node]))
        trees.append(tree)
    entries = tuple(
        tuple(trees[i][node] for i in range(len(centers))) for node in range(n)
    )
    return AddressMap(centers, entries)
