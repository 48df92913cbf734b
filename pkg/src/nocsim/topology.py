"""NoC interconnect graphs: generators, scoring, fault views, and synthesis.

Node ids are 0..N-1. Meshes and tori are row-major (id = y*width + x).
Every link is full-duplex and modeled as two directed links; the port index
of a directed link is its position in the source node's neighbor list.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass

from .errors import Disconnected, Infeasible, InvalidParams

MESH = "mesh"
TORUS = "torus"
CIRCULANT = "circulant"
FLATTENED_BUTTERFLY = "flattened_butterfly"
SYNTHESIZED = "synthesized"
CUSTOM = "custom"


class Topology:
    """Immutable directed graph of routers plus generator metadata.

    ``adjacency[u]`` is the ordered neighbor tuple of node u; the position of
    a neighbor in that tuple is the port index of the outgoing link.
    """

    def __init__(self, adjacency, kind=CUSTOM, kind_params=None):
        adjacency = tuple(tuple(nbrs) for nbrs in adjacency)
        n = len(adjacency)
        for u, nbrs in enumerate(adjacency):
            if len(set(nbrs)) != len(nbrs):
                raise InvalidParams(f"duplicate link at node {u}")
            for v in nbrs:
                if v == u:
                    raise InvalidParams(f"self-loop at node {u}")
                if not 0 <= v < n:
                    raise InvalidParams(f"link target {v} out of range")
                if u not in adjacency[v]:
                    raise InvalidParams(f"asymmetric link {u}->{v}")
        self.adjacency = adjacency
        self.node_count = n
        self.kind = kind
        self.kind_params = dict(kind_params or {})
        self._port_of = [
            {v: p for p, v in enumerate(nbrs)} for nbrs in adjacency
        ]

    # -- structure queries -------------------------------------------------

    def neighbors(self, u):
        return self.adjacency[u]

    def degree(self, u):
        return len(self.adjacency[u])

    def port_to(self, u, v):
        """Port index of the directed link u->v."""
        return self._port_of[u][v]

    def has_link(self, u, v):
        return v in self._port_of[u]

    @property
    def links(self):
        """Set of directed links as (src, dst, port-at-src)."""
        return {
            (u, v, p)
            for u, nbrs in enumerate(self.adjacency)
            for p, v in enumerate(nbrs)
        }

    def undirected_edges(self):
        return sorted(
            {(min(u, v), max(u, v)) for u, nbrs in enumerate(self.adjacency) for v in nbrs}
        )

    @property
    def core_count(self):
        """Attached cores: concentration * routers for flattened butterfly."""
        c = self.kind_params.get("concentration", 1)
        return self.node_count * c

    def __eq__(self, other):
        return (
            isinstance(other, Topology)
            and self.adjacency == other.adjacency
            and self.kind == other.kind
            and self.kind_params == other.kind_params
        )

    def __repr__(self):
        return f"Topology({self.kind}, n={self.node_count}, params={self.kind_params})"

    # -- traversal ---------------------------------------------------------

    def bfs_distances(self, start):
        """Hop distance from start to every node; -1 where unreachable."""
        dist = [-1] * self.node_count
        dist[start] = 0
        q = deque([start])
        while q:
            u = q.popleft()
            du = dist[u]
            for v in self.adjacency[u]:
                if dist[v] < 0:
                    dist[v] = du + 1
                    q.append(v)
        return dist

    def is_connected(self):
        if self.node_count == 0:
            return True
        return -1 not in self.bfs_distances(0)

    # -- mesh/torus coordinate helpers ------------------------------------

    def grid_shape(self):
        if self.kind not in (MESH, TORUS):
            raise InvalidParams(f"{self.kind} topology has no grid shape")
        return self.kind_params["width"], self.kind_params["height"]

    def node_xy(self, node):
        w, _ = self.grid_shape()
        return node % w, node // w

    def xy_node(self, x, y):
        w, _ = self.grid_shape()
        return y * w + x


@dataclass(frozen=True)
class TopologyScore:
    diameter: int
    avg_distance: float
    max_degree: int
    edge_count: int


# --------------------------------------------------------------------------
# Generators
# --------------------------------------------------------------------------

def mesh(width, height):
    if width < 1 or height < 1:
        raise InvalidParams("mesh dimensions must be positive")
    if width * height < 1:
        raise InvalidParams("empty mesh")
    adj = []
    for y in range(height):
        for x in range(width):
            nbrs = []
            if x + 1 < width:
                nbrs.append(y * width + x + 1)
            if x > 0:
                nbrs.append(y * width + x - 1)
            if y + 1 < height:
                nbrs.append((y + 1) * width + x)
            if y > 0:
                nbrs.append((y - 1) * width + x)
            adj.append(nbrs)
    return Topology(adj, MESH, {"width": width, "height": height})


def torus(width, height):
    if width < 2 or height < 2:
        raise InvalidParams("torus dimensions must be at least 2")
    adj = []
    for y in range(height):
        for x in range(width):
            nbrs = []
            for nx, ny in (
                ((x + 1) % width, y),
                ((x - 1) % width, y),
                (x, (y + 1) % height),
                (x, (y - 1) % height),
            ):
                node = ny * width + nx
                if node not in nbrs:  # width/height == 2 folds both directions
                    nbrs.append(node)
            adj.append(nbrs)
    return Topology(adj, TORUS, {"width": width, "height": height})


def circulant(n, generators):
    """C(N; s1..sk): node i links to (i +- sj) mod N."""
    generators = tuple(generators)
    if n < 2:
        raise InvalidParams("circulant needs at least 2 nodes")
    if not generators:
        raise InvalidParams("circulant needs at least one generator")
    if len(set(generators)) != len(generators):
        raise InvalidParams("duplicate circulant generators")
    for s in generators:
        if not 1 <= s <= n // 2:
            raise InvalidParams(f"generator {s} outside 1..{n // 2}")
    adj = []
    for i in range(n):
        nbrs = []
        for s in generators:
            for v in ((i + s) % n, (i - s) % n):
                if v not in nbrs:
                    nbrs.append(v)
        adj.append(nbrs)
    return Topology(adj, CIRCULANT, {"n": n, "generators": generators})


def ring(n):
    return circulant(n, (1,))


def flattened_butterfly(rows, cols, concentration=1):
    """Router grid with all-to-all links inside every row and every column.

    Attached cores are injection/ejection queues on their router, not graph
    nodes; ``concentration`` is kept as metadata.
    """
    if rows < 1 or cols < 1 or concentration < 1:
        raise InvalidParams("flattened butterfly parameters must be positive")
    adj = []
    for r in range(rows):
        for c in range(cols):
            nbrs = [r * cols + c2 for c2 in range(cols) if c2 != c]
            nbrs += [r2 * cols + c for r2 in range(rows) if r2 != r]
            adj.append(nbrs)
    return Topology(
        adj,
        FLATTENED_BUTTERFLY,
        {"rows": rows, "cols": cols, "concentration": concentration},
    )


_GENERATORS = {
    MESH: lambda p: mesh(p["width"], p["height"]),
    TORUS: lambda p: torus(p["width"], p["height"]),
    CIRCULANT: lambda p: circulant(p["n"], p["generators"]),
    FLATTENED_BUTTERFLY: lambda p: flattened_butterfly(
        p["rows"], p["cols"], p.get("concentration", 1)
    ),
}


def generate(kind, **kind_params):
    if kind not in _GENERATORS:
        raise InvalidParams(f"unknown topology kind {kind!r}")
    return _GENERATORS[kind](kind_params)


# --------------------------------------------------------------------------
# Scoring
# --------------------------------------------------------------------------

def score(topology):
    """Diameter, average distance (ordered pairs), max degree, edge count."""
    n = topology.node_count
    if n == 1:
        return TopologyScore(0, 0.0, 0, 0)
    total = 0
    diameter = 0
    for u in range(n):
        dist = topology.bfs_distances(u)
        if -1 in dist:
            raise Disconnected(f"node {dist.index(-1)} unreachable from {u}")
        total += sum(dist)
        diameter = max(diameter, max(dist))
    avg = total / (n * (n - 1))
    max_degree = max(topology.degree(u) for u in range(n))
    return TopologyScore(diameter, avg, max_degree, len(topology.undirected_edges()))


# --------------------------------------------------------------------------
# Fault views
# --------------------------------------------------------------------------

class TopologyView:
    """Read-only view of a topology with some nodes/directed links failed.

    The base topology is never mutated. Failed links are directed (u, v)
    pairs; a failed node implies all its incident directed links.
    """

    def __init__(self, base, failed_nodes=(), failed_links=()):
        self.base = base
        self.failed_nodes = frozenset(failed_nodes)
        for u in self.failed_nodes:
            if not 0 <= u < base.node_count:
                raise InvalidParams(f"failed node {u} not in topology")
        links = set()
        for u, v in failed_links:
            if not base.has_link(u, v):
                raise InvalidParams(f"failed link {u}->{v} not in topology")
            links.add((u, v))
        for u in self.failed_nodes:
            for v in base.neighbors(u):
                links.add((u, v))
                links.add((v, u))
        self.failed_links = frozenset(links)

    @property
    def node_count(self):
        return self.base.node_count

    def has_node(self, u):
        return u not in self.failed_nodes

    def has_link(self, u, v):
        return self.base.has_link(u, v) and (u, v) not in self.failed_links

    def alive_nodes(self):
        return [u for u in range(self.base.node_count) if u not in self.failed_nodes]

    def alive_neighbors(self, u):
        """(port, neighbor) pairs over alive outgoing links of u."""
        if u in self.failed_nodes:
            return []
        return [
            (p, v)
            for p, v in enumerate(self.base.neighbors(u))
            if (u, v) not in self.failed_links
        ]

    def bfs_distances(self, start):
        dist = [-1] * self.base.node_count
        if start in self.failed_nodes:
            return dist
        dist[start] = 0
        q = deque([start])
        while q:
            u = q.popleft()
            du = dist[u]
            for _, v in self.alive_neighbors(u):
                if dist[v] < 0:
                    dist[v] = du + 1
                    q.append(v)
        return dist

    def is_connected(self):
        alive = self.alive_nodes()
        if not alive:
            return True
        dist = self.bfs_distances(alive[0])
        return all(dist[u] >= 0 for u in alive)


def alive_view(topology, failed_nodes=(), failed_links=()):
    return TopologyView(topology, failed_nodes, failed_links)


# --------------------------------------------------------------------------
# Edge-list text format
# --------------------------------------------------------------------------

def to_edge_list_text(topology):
    """'nodes N' then one 'u v' line per undirected edge, sorted."""
    lines = [f"nodes {topology.node_count}"]
    lines += [f"{u} {v}" for u, v in topology.undirected_edges()]
    return "\n".join(lines) + "\n"


def from_edge_list_text(text, kind=CUSTOM):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("nodes "):
        raise InvalidParams("edge list must start with 'nodes N'")
    try:
        n = int(lines[0].split()[1])
    except (IndexError, ValueError) as exc:
        raise InvalidParams("bad node count line") from exc
    adj = [[] for _ in range(n)]
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise InvalidParams(f"bad edge line {ln!r}")
        u, v = int(parts[0]), int(parts[1])
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidParams(f"edge {u} {v} out of range")
        adj[u].append(v)
        adj[v].append(u)
    return Topology(adj, kind)


# --------------------------------------------------------------------------
# Constrained synthesis
# --------------------------------------------------------------------------

def _moore_bound(max_degree, max_diameter):
    """Maximum node count reachable with the given degree/diameter caps."""
    if max_degree <= 0:
        return 1
    total = 1
    layer = max_degree
    for _ in range(max_diameter):
        total += layer
        layer *= max_degree - 1
    return total


def _edges_feasible(n, edges, max_degree, max_diameter):
    """Check degree, connectivity, and diameter for an undirected edge set."""
    deg = [0] * n
    adj = [[] for _ in range(n)]
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
        adj[u].append(v)
        adj[v].append(u)
    if any(d > max_degree for d in deg):
        return False
    for s in range(n):
        dist = [-1] * n
        dist[s] = 0
        q = deque([s])
        seen = 1
        while q:
            u = q.popleft()
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    if dist[v] > max_diameter:
                        return False
                    q.append(v)
                    seen += 1
        if seen < n:
            return False
    return True


def _avg_distance(n, edges):
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    total = 0
    for s in range(n):
        dist = [-1] * n
        dist[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    q.append(v)
        total += sum(dist)
    return total / (n * (n - 1))


def exhaustive_optimum(n, max_degree, max_diameter):
    """Exhaustive minimum edge count (tie-break: average distance).

    Oracle-grade search over all edge subsets of K_n, smallest sizes first.
    Returns (edges, avg_distance) or None when infeasible. Intended for
    n <= 8; cost grows as 2^C(n,2).
    """
    all_edges = list(itertools.combinations(range(n), 2))
    # connectivity needs >= n-1 edges; degree cap limits the maximum
    lo = n - 1
    hi = min(len(all_edges), n * max_degree // 2)
    for m in range(lo, hi + 1):
        best = None
        for edges in itertools.combinations(all_edges, m):
            if _edges_feasible(n, edges, max_degree, max_diameter):
                avg = _avg_distance(n, edges)
                if best is None or avg < best[1]:
                    best = (edges, avg)
        if best is not None:
            return best
    return None


def _local_minimize(n, edges, max_degree, max_diameter, rng):
    """Greedily remove removable edges in a seeded random order."""
    edges = list(edges)
    improved = True
    while improved:
        improved = False
        order = list(range(len(edges)))
        rng.shuffle(order)
        for i in sorted(order, reverse=True):
            trial = edges[:i] + edges[i + 1:]
            if trial and _edges_feasible(n, trial, max_degree, max_diameter):
                edges = trial
                improved = True
                break
    return edges


def synthesize(n, max_degree, max_diameter, seed=0, budget=200):
    """Connected graph on n nodes meeting degree/diameter caps, minimizing
    edge count with average distance as tie-breaker.

    Seeded random restarts with greedy edge removal; for n <= 8 an
    infeasibility verdict is certified exhaustively.
    """
    if not 4 <= n <= 12:
        raise InvalidParams("synthesis supports n in 4..12")
    if max_degree < 2:
        raise InvalidParams("max_degree must be >= 2")
    if max_diameter < 1:
        raise InvalidParams("max_diameter must be >= 1")
    if _moore_bound(max_degree, max_diameter) < n:
        raise Infeasible(
            f"degree {max_degree} diameter {max_diameter} reaches at most "
            f"{_moore_bound(max_degree, max_diameter)} < {n} nodes"
        )

    all_edges = list(itertools.combinations(range(n), 2))
    rng = random.Random(seed)
    best = None  # (edge_count, avg_distance, edges)
    found_feasible = False
    for _ in range(max(1, budget)):
        # start from a random maximal degree-capped graph
        deg = [0] * n
        edges = []
        order = all_edges[:]
        rng.shuffle(order)
        for u, v in order:
            if deg[u] < max_degree and deg[v] < max_degree:
                edges.append((u, v))
                deg[u] += 1
                deg[v] += 1
        if not _edges_feasible(n, edges, max_degree, max_diameter):
            continue
        found_feasible = True
        edges = _local_minimize(n, edges, max_degree, max_diameter, rng)
        key = (len(edges), _avg_distance(n, edges))
        if best is None or key < (best[0], best[1]):
            best = (key[0], key[1], sorted(edges))

    if not found_feasible:
        if n <= 8:
            exact = exhaustive_optimum(n, max_degree, max_diameter)
            if exact is None:
                raise Infeasible(
                    f"no graph on {n} nodes meets degree<={max_degree}, "
                    f"diameter<={max_diameter} (exhaustive check)"
                )
            best = (len(exact[0]), exact[1], sorted(exact[0]))
        else:
            raise Infeasible(
                f"no feasible graph found within budget {budget} "
                f"(n={n} too large for exhaustive certification)"
            )

    adj = [[] for _ in range(n)]
    for u, v in best[2]:
        adj[u].append(v)
        adj[v].append(u)
    return Topology(
        adj,
        SYNTHESIZED,
        {"n": n, "max_degree": max_degree, "max_diameter": max_diameter, "seed": seed},
    )
