"""Deterministic cycle-by-cycle simulation loop.

Two-phase update: every router's send decisions for cycle t are taken
against the buffer/credit state at the start of t; dequeues and link
traversals are applied afterwards, so per-cycle evaluation order never
matters. Identical configs yield byte-identical reports.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import fabric, routing, topology as topo, workload
from .addressing import (
    assign_hierarchical_addresses,
    assign_virtual_coordinates,
    default_anchors,
)
from .errors import (
    ConfigError,
    CoordinateAliasing,
    DeadlockDetected,
    LivelockDetected,
)

ALGORITHMS = ("xy", "dyxy", "greedy", "greedy_fallback", "neighborhood", "hierarchical")
GRID_ALGOS = ("xy", "dyxy")


@dataclass(frozen=True)
class WirelessConfig:
    enabled: bool = False
    hubs: tuple = ()
    distance_threshold: int = 8
    w_cycles: int = 4
    # one admitted packet per hub at a time: the single radio channel
    # saturates fast, and a deep queue only adds waiting on top
    queue_cap: int = 1


@dataclass(frozen=True)
class SimConfig:
    topology: "topo.Topology"
    algorithm: str
    traffic: workload.TrafficSpec
    switching: str = fabric.WORMHOLE
    buffer_depth: int = 4
    vc_count: int = None  # default: 2 on torus, 1 elsewhere
    pipeline: int = 1
    fault_schedule: workload.FaultSchedule = field(default_factory=workload.FaultSchedule)
    wireless: WirelessConfig = field(default_factory=WirelessConfig)
    warmup_cycles: int = 10_000
    measure_cycles: int = 50_000
    drain_cycles: int = 20_000
    anchor_count: int = 3
    center_count: int = 2
    strict: bool = True         # livelock violations abort the run
    max_packets: int = None     # stop injecting after this many packets
    preloaded: tuple = ()       # (cycle, src, dst) packets injected explicitly

    def resolved_vc_count(self):
        if self.vc_count is not None:
            return self.vc_count
        return 2 if self.topology.kind == topo.TORUS else 1

    def validate(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown routing algorithm {self.algorithm!r}")
        if self.algorithm in GRID_ALGOS and self.topology.kind not in (topo.MESH, topo.TORUS):
            raise ConfigError(
                f"{self.algorithm} requires a mesh or torus, got {self.topology.kind}"
            )
        if self.algorithm == "dyxy" and self.topology.kind != topo.MESH:
            raise ConfigError("dyxy requires a mesh")
        if self.switching not in fabric.SWITCHING_POLICIES:
            raise ConfigError(f"unknown switching policy {self.switching!r}")
        if self.switching in (fabric.SAF, fabric.VCT):
            if self.buffer_depth < self.traffic.packet_length:
                raise ConfigError(
                    f"{self.switching} needs buffer_depth >= packet_length"
                )
        if self.warmup_cycles < 0 or self.measure_cycles <= 0 or self.drain_cycles < 0:
            raise ConfigError("cycle windows must be positive")
        if self.pipeline < 1 or self.buffer_depth < 1 or self.resolved_vc_count() < 1:
            raise ConfigError("fabric constants must be >= 1")
        if self.wireless.enabled:
            if len(self.wireless.hubs) < 2:
                raise ConfigError("wireless overlay needs at least 2 hubs")
            for h in self.wireless.hubs:
                if not 0 <= h < self.topology.node_count:
                    raise ConfigError(f"hub {h} not in topology")


@dataclass(frozen=True)
class MetricsReport:
    delivered: int
    dropped: int
    injected: int
    residual: int
    avg_latency: float
    p99_latency: float
    throughput: float
    utilization: float
    per_link_utilization: dict
    wireless_share: float
    livelock: int
    deadlock: int
    wall_time: float

    SERIAL_KEYS = (
        "delivered", "dropped", "avg_latency", "p99_latency",
        "throughput", "wireless_share", "livelock", "deadlock",
    )

    def serialize(self):
        """Flat key=value text block with a fixed key order."""
        lines = []
        for key in self.SERIAL_KEYS:
            value = getattr(self, key)
            if isinstance(value, float):
                lines.append(f"{key}={value:.6f}")
            else:
                lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SaturationResult:
    rate: float
    saturated: bool
    zero_load_latency: float
    latencies: tuple  # (rate, avg_latency) pairs actually measured


class Simulation:
    """One deterministic, single-threaded simulation instance."""

    def __init__(self, config):
        config.validate()
        self.cfg = config
        self.topo = config.topology
        self.n = self.topo.node_count
        self.policy = config.switching
        self.pipeline = config.pipeline
        self.vc_count = config.resolved_vc_count()

        dists = [self.topo.bfs_distances(u) for u in range(self.n)]
        self.dist = dists
        self.diameter = max(max(d) for d in dists) if self.n > 1 else 0
        self.livelock_bound = max(4 * self.diameter, 4)
        self.deadlock_window = max(10 * self.diameter, 100)

        self.routers = [
            fabric.RouterState(u, self.topo.degree(u), self.vc_count, config.buffer_depth)
            for u in range(self.n)
        ]
        # input-port index at the downstream end of every (u, port) link
        self.down_port = [
            [self.topo.port_to(v, u) for v in self.topo.neighbors(u)]
            for u in range(self.n)
        ]

        algo = config.algorithm
        self.coord_map = None
        self.address_map = None
        if algo in ("greedy", "greedy_fallback"):
            anchors = default_anchors(self.topo, config.anchor_count)
            self.coord_map = assign_virtual_coordinates(self.topo, anchors)
        if algo == "hierarchical":
            centers = default_anchors(self.topo, config.center_count)
            self.address_map = assign_hierarchical_addresses(self.topo, centers)

        self.schedule = config.fault_schedule
        self.fault_changes = set(self.schedule.change_cycles())
        self.epoch = 0
        self.view = topo.TopologyView(self.topo)
        if 0 not in self.fault_changes:
            nodes, links = workload.faults_at(self.schedule, self.topo, 0)
            if nodes or links:
                self.fault_changes.add(0)

        self.wireless = None
        if config.wireless.enabled:
            w = config.wireless
            self.wireless = fabric.WirelessHubState(w.hubs, w.w_cycles, w.queue_cap)
            self.hub_dist = {h: dists[h] for h in w.hubs}
            self.reassembly = {}  # pid -> [flits seen, max hop_count]
            # admitted-but-untransmitted packets per entry hub; admission
            # reserves the slot here so stale queue state cannot overshoot
            self.hub_outstanding = {h: 0 for h in w.hubs}

        # counters
        self.next_pid = 0
        self.injected_packets = 0
        self.delivered_packets = 0
        self.dropped_packets = 0
        self.injected_flits = 0
        self.delivered_flits = 0
        self.dropped_flits = 0
        self.measured_latencies = []
        self.measured_delivered_flits = 0
        self.wireless_delivered = 0
        self.livelock_violations = 0
        self.link_busy = {}  # (u, v) -> busy cycles during measurement
        self.pending = []    # (node, in_port, flit) arriving next cycle
        self.eject_progress = {}  # packet -> flits consumed before its tail
        self.last_progress = 0
        self.route_cache = {}

        self.preloaded = sorted(config.preloaded)

    # ------------------------------------------------------------------
    # routing decisions
    # ------------------------------------------------------------------

    def _first_route(self, src, dst):
        """Lexicographically-smallest shortest route over the alive view
        (equals min(neighborhood_routes(...)))."""
        key = (src, dst, self.epoch)
        cached = self.route_cache.get(key)
        if cached is not None:
            return cached
        to_dst = self._labels_to(dst)
        if to_dst[src] < 0:
            self.route_cache[key] = ()
            return ()
        route = [src]
        node = src
        while node != dst:
            node = min(
                v for _, v in self.view.alive_neighbors(node)
                if to_dst[v] == to_dst[node] - 1
            )
            route.append(node)
        route = tuple(route)
        self.route_cache[key] = route
        return route

    def _labels_to(self, dst):
        """Hop distance of every node to dst over alive forward links."""
        from collections import deque
        dist = [-1] * self.n
        if not self.view.has_node(dst):
            return dist
        preds = self._rev_adj()
        dist[dst] = 0
        q = deque([dst])
        while q:
            u = q.popleft()
            for p in preds[u]:
                if dist[p] < 0:
                    dist[p] = dist[u] + 1
                    q.append(p)
        return dist

    def _rev_adj(self):
        rev = getattr(self, "_rev_adj_cache", None)
        if rev is not None and rev[0] == self.epoch:
            return rev[1]
        preds = [[] for _ in range(self.n)]
        for u in range(self.n):
            for _, v in self.view.alive_neighbors(u):
                preds[v].append(u)
        self._rev_adj_cache = (self.epoch, preds)
        return preds

    def _injection_route(self, src, dst):
        """Source route for route-at-injection algorithms; () if unreachable."""
        algo = self.cfg.algorithm
        if algo == "xy" and self.topo.kind == topo.MESH:
            return routing.route_xy(self.topo, src, dst)
        if algo == "neighborhood":
            return self._first_route(src, dst)
        if algo == "hierarchical":
            return routing.hierarchical_route(self.address_map, src, dst)
        return None  # per-hop algorithm

    def _decide(self, node, packet, in_vc, came_from):
        """(next_node, out_vc) for the head of ``packet`` at ``node``;
        None drops the packet (no route over the alive view)."""
        algo = self.cfg.algorithm
        dst = packet.dst
        if packet.route is not None:
            idx = packet.route_index.get(node)
            if idx is None or idx + 1 >= len(packet.route):
                return None
            nxt = packet.route[idx + 1]
            if not self.view.has_link(node, nxt) or not self.view.has_node(nxt):
                return None
            if algo == "xy" and self.topo.kind == topo.TORUS:
                pass  # torus xy is handled per-hop below
            return nxt, 0
        if algo == "xy":  # torus: per-hop for the dateline VC rule
            nxt, vc = routing.torus_xy_next(self.topo, node, dst, in_vc, came_from)
            if vc >= self.vc_count:
                vc = self.vc_count - 1
            if not self.view.has_link(node, nxt):
                return None
            return nxt, vc
        if algo == "dyxy":
            occ = {
                v: self.routers[v].congestion()
                for v in self.topo.neighbors(node)
            }
            decision = routing.next_hop_dyxy(self.topo, node, dst, occ)
            if decision.kind != "forward":
                return None
            if not self.view.has_link(node, decision.node):
                return None
            return decision.node, 0
        if algo in ("greedy", "greedy_fallback"):
            try:
                decision = routing.next_hop_greedy(
                    self.coord_map, node, dst, self.view.alive_neighbors(node)
                )
            except CoordinateAliasing:
                decision = routing.LOCAL_MINIMUM
            if decision.kind == "forward":
                return decision.node, 0
            if algo == "greedy":
                return None
            fallback = self._first_route(node, dst)
            if not fallback:
                return None
            packet.set_route(fallback)
            return fallback[1], 0
        raise ConfigError(f"no per-hop rule for algorithm {algo!r}")

    # ------------------------------------------------------------------
    # run loop
    # ------------------------------------------------------------------

    def run(self):
        cfg = self.cfg
        start_wall = time.perf_counter()
        inject_until = cfg.warmup_cycles + cfg.measure_cycles
        total = inject_until + cfg.drain_cycles
        self.measure_start = cfg.warmup_cycles
        self.measure_end = inject_until
        preload_idx = 0
        now = 0
        while now < total:
            progress = False
            if now in self.fault_changes:
                progress |= self._apply_faults(now)
            progress |= self._apply_arrivals(now)
            if now < inject_until:
                while (
                    preload_idx < len(self.preloaded)
                    and self.preloaded[preload_idx][0] <= now
                ):
                    _, src, dst = self.preloaded[preload_idx]
                    preload_idx += 1
                    self._inject_packet(src, dst, now)
                    progress = True
                progress |= self._inject(now)
            if self.wireless is not None:
                progress |= self._wireless_cycle(now)
            progress |= self._send_phase(now)
            if progress:
                self.last_progress = now
            elif self._in_network_flits() > 0:
                if now - self.last_progress >= self.deadlock_window:
                    raise DeadlockDetected(
                        f"no flit movement for {now - self.last_progress} cycles "
                        f"at cycle {now}"
                    )
            now += 1
        self._check_conservation()
        return self._report(time.perf_counter() - start_wall)

    # -- phases --------------------------------------------------------

    def _apply_faults(self, now):
        nodes, links = workload.faults_at(self.schedule, self.topo, now)
        self.view = topo.TopologyView(self.topo, nodes, links)
        self.epoch += 1
        self.route_cache.clear()
        dead = set()
        # packets occupying failed elements
        for u in nodes:
            for f in list(self.routers[u].buffered_flits()):
                dead.add(f.packet)
        for node, in_port, f in self.pending:
            up = self.topo.neighbors(node)[in_port]
            if (up, node) in links or node in nodes or up in nodes:
                dead.add(f.packet)
        for u in range(self.n):
            for (port, _vc), vcq in self.routers[u].inputs.items():
                if not vcq.queue:
                    continue
                up = self.topo.neighbors(u)[port]
                if (up, u) in links:
                    # flits mid-transfer over a failed link: drop the packet
                    if vcq.bound is not None and vcq.tail_arrived is None:
                        dead.add(vcq.bound)
        changed = False
        for packet in dead:
            self._drop_packet(packet)
            changed = True
        return changed

    def _drop_packet(self, packet):
        if packet.dropped:
            return
        packet.dropped = True
        self.dropped_packets += 1
        # flits already consumed at the destination die with the packet
        self.dropped_flits += self.eject_progress.pop(packet, 0)
        if packet.wireless and not packet.reinjected:
            # lost on the way to its entry hub: release the admission slot
            self.hub_outstanding[packet.dst] -= 1
            partial = self.reassembly.pop(packet.pid, None)
            if partial is not None:
                self.dropped_flits += partial[0]

    def _discard_flit(self, flit):
        self.dropped_flits += 1

    def _apply_arrivals(self, now):
        if not self.pending:
            return False
        pending, self.pending = self.pending, []
        progress = False
        for node, in_port, flit in pending:
            packet = flit.packet
            if packet.dropped:
                self._discard_flit(flit)
                progress = True
                continue
            if not self.view.has_node(node):
                self._drop_packet(packet)
                self._discard_flit(flit)
                progress = True
                continue
            if node == packet.dst:
                self._consume(node, flit, now)
                progress = True
                continue
            vcq = self.routers[node].inputs[(in_port, flit.vc)]
            vcq.push(flit, now)
            progress = True
        return progress

    def _consume(self, node, flit, now):
        """Flit reached its current wired target (final dst or a hub)."""
        packet = flit.packet
        if packet.wireless and node != packet.final_dst:
            # stage-1 leg: reassemble at the hub, then queue for the radio
            entry = self.reassembly.setdefault(packet.pid, [0, 0])
            entry[0] += 1
            entry[1] = max(entry[1], flit.hop_count)
            if entry[0] == packet.length:
                packet.hops = entry[1]
                del self.reassembly[packet.pid]
                self.wireless.enqueue(node, packet)
            return
        if flit.is_tail:
            self.eject_progress.pop(packet, None)
            self._deliver(packet, now)
        else:
            self.eject_progress[packet] = self.eject_progress.get(packet, 0) + 1

    def _deliver(self, packet, now):
        self.delivered_packets += 1
        self.delivered_flits += packet.length
        if packet.wireless:
            self.wireless_delivered += 1
        if self.measure_start <= now < self.measure_end:
            self.measured_delivered_flits += packet.length
        if packet.measured:
            self.measured_latencies.append(now - packet.inject_cycle)

    def _inject(self, now):
        spec = self.cfg.traffic
        if spec.injection_rate <= 0.0:
            return False
        if (
            self.cfg.max_packets is not None
            and self.injected_packets >= self.cfg.max_packets
        ):
            return False
        progress = False
        alive = self.view.has_node if (self.view.failed_nodes or self.view.failed_links) else None
        for node in range(self.n):
            if not self.view.has_node(node):
                continue
            dst = workload.inject(spec, self.topo, node, now, alive)
            if dst is None:
                continue
            self._inject_packet(node, dst, now)
            progress = True
            if (
                self.cfg.max_packets is not None
                and self.injected_packets >= self.cfg.max_packets
            ):
                break
        return progress

    def _inject_packet(self, src, dst, now):
        packet = fabric.Packet(
            self.next_pid, src, dst, self.cfg.traffic.packet_length, now,
            measured=self.measure_start <= now < self.measure_end,
        )
        self.next_pid += 1
        self.injected_packets += 1
        self.injected_flits += packet.length

        if self.wireless is not None and not packet.reinjected:
            self._try_wireless(packet)

        if packet.route is None and packet.dst != src:
            route = self._injection_route(src, packet.dst)
            if route is not None:
                if not route:
                    # unreachable over the alive view
                    self._drop_packet(packet)
                    self.dropped_flits += packet.length
                    return
                packet.set_route(route)

        flits = fabric.make_flits(packet)
        if packet.wireless and packet.dst == src:
            # the source is itself the entry hub: queue straight for the radio
            packet.hops = 0
            self.wireless.enqueue(src, packet)
            return
        self.routers[src].local.push_packet(flits, now)

    def _try_wireless(self, packet):
        w = self.cfg.wireless
        src, dst = packet.src, packet.final_dst
        hub_a = self.wireless.nearest_hub(src, self.hub_dist)
        hub_b = self.wireless.nearest_hub(dst, self.hub_dist)
        if hub_a == hub_b:
            return
        admitted = fabric.wireless_admission(
            self.dist[src][dst],
            w.distance_threshold,
            self.hub_outstanding[hub_a],
            w.queue_cap,
        )
        if admitted:
            packet.wireless = True
            packet.dst = hub_a
            self.hub_outstanding[hub_a] += 1

    def _wireless_cycle(self, now):
        ws = self.wireless
        busy_before = ws.busy_until is not None
        delivered = ws.step(
            now, lambda p: ws.nearest_hub(p.final_dst, self.hub_dist)
        )
        progress = bool(delivered) or busy_before != (ws.busy_until is not None)
        for packet, hub in delivered:
            self.hub_outstanding[packet.dst] -= 1  # dst is still the entry hub
            if packet.dropped:
                self.dropped_flits += packet.length
                continue
            packet.dst = packet.final_dst
            packet.reinjected = True
            if hub == packet.final_dst:
                self._deliver(packet, now)
                continue
            route = self._injection_route(hub, packet.dst)
            if route is not None:
                if not route:
                    self._drop_packet(packet)
                    self.dropped_flits += packet.length
                    continue
                packet.set_route(route)
            else:
                packet.route = None
                packet.route_index = None
            flits = fabric.make_flits(packet)
            for f in flits:
                f.hop_count = packet.hops + 1  # the radio hop
            self.routers[hub].local.push_packet(flits, now)
            progress = True
        return progress

    def _send_phase(self, now):
        measuring = self.measure_start <= now < self.measure_end
        sends = []  # (router, in_key, out_port, out_vc, next_node)
        for u in range(self.n):
            router = self.routers[u]
            if not self.view.has_node(u):
                continue
            wants = {}  # out_port -> list of in_keys in fixed order
            for key in self._input_order(u):
                flit = self._peek(router, key, now)
                if flit is None:
                    continue
                d = self._decision_for(u, router, key, flit, now)
                if d is None:
                    continue
                nxt, out_vc = d
                out_port = self.topo.port_to(u, nxt)
                if not self._ready(router, key, flit, now):
                    continue
                if not self._downstream_accepts(u, out_port, out_vc, flit):
                    continue
                wants.setdefault(out_port, []).append((key, out_vc, nxt))
            for out_port, candidates in sorted(wants.items()):
                chosen = self._arbitrate(router, out_port, candidates, u)
                if chosen is not None:
                    sends.append((u, *chosen, out_port))
        progress = False
        for u, key, out_vc, nxt, out_port in sends:
            router = self.routers[u]
            flit = router.local.pop() if key == "local" else router.inputs[key].pop()
            flit.vc = out_vc
            flit.hop_count += 1
            if flit.hop_count > self.livelock_bound:
                self.livelock_violations += 1
                if self.cfg.strict:
                    raise LivelockDetected(
                        f"flit of packet {flit.packet.pid} exceeded "
                        f"{self.livelock_bound} hops"
                    )
            in_port = self.down_port[u][out_port]
            self.pending.append((nxt, in_port, flit))
            if measuring:
                link = (u, nxt)
                self.link_busy[link] = self.link_busy.get(link, 0) + 1
            progress = True
        return progress

    def _input_order(self, u):
        order = getattr(self, "_input_order_cache", None)
        if order is None:
            order = {}
            self._input_order_cache = order
        cached = order.get(u)
        if cached is None:
            cached = [
                (port, vc)
                for port in range(self.topo.degree(u))
                for vc in range(self.vc_count)
            ] + ["local"]
            order[u] = cached
        return cached

    def _peek(self, router, key, now):
        q = router.local.queue if key == "local" else router.inputs[key].queue
        while q and q[0].packet.dropped:
            flit = router.local.pop() if key == "local" else router.inputs[key].pop()
            self._discard_flit(flit)
        if key != "local" and not q:
            vcq = router.inputs[key]
            if vcq.bound is not None and vcq.bound.dropped:
                # the bound packet died upstream and its tail will never
                # arrive; release the channel or it blocks heads forever
                vcq.bound = None
                vcq.tail_arrived = None
                vcq.decision = None
        return q[0] if q else None

    def _decision_for(self, u, router, key, flit, now):
        holder = router.local if key == "local" else router.inputs[key]
        cached = holder.decision
        if cached is not None and cached[0] == flit.packet.pid:
            nxt = cached[2][0]
            if cached[1] == self.epoch or self.view.has_link(u, nxt):
                return cached[2]
            # the committed next link died under the packet: drop it
            self._drop_packet(flit.packet)
            return None
        if not flit.is_head:
            # body flits must follow the head; a lost cache means the head
            # was dropped and the queue will be purged via _peek
            return None
        if key == "local":
            came_from, in_vc = None, None
        else:
            came_from = self.topo.neighbors(u)[key[0]]
            in_vc = key[1]
        decision = self._decide(u, flit.packet, in_vc, came_from)
        if decision is None:
            self._drop_packet(flit.packet)
            return None
        holder.decision = (flit.packet.pid, self.epoch, decision)
        return decision

    def _ready(self, router, key, flit, now):
        if key == "local":
            return now >= flit.arrival + self.pipeline
        return fabric.flit_ready(self.policy, router.inputs[key], flit, now, self.pipeline)

    def _downstream_accepts(self, u, out_port, out_vc, flit):
        v = self.topo.neighbors(u)[out_port]
        if not self.view.has_node(v) or not self.view.has_link(u, v):
            return False
        if v == flit.packet.dst:
            return True  # ejection consumes on arrival
        down = self.routers[v].inputs[(self.down_port[u][out_port], out_vc)]
        return fabric.flow_control_accept(
            self.policy, down, flit, flit.packet.length
        )

    def _arbitrate(self, router, out_port, candidates, u):
        """Round-robin over the fixed input ordering."""
        order = self._input_order(u)
        index = {key: i for i, key in enumerate(order)}
        candidates = sorted(candidates, key=lambda c: index[c[0]])
        ptr = router.rr[out_port]
        chosen = min(candidates, key=lambda c: (index[c[0]] - ptr) % len(order))
        router.rr[out_port] = (index[chosen[0]] + 1) % len(order)
        router.link_busy[out_port] += 1
        return chosen

    # -- accounting ----------------------------------------------------

    def _in_network_flits(self):
        """Movable flits only: dropped packets' leftovers await lazy discard
        and must not look like pending work to the deadlock detector."""
        count = sum(1 for _, _, f in self.pending if not f.packet.dropped)
        for r in self.routers:
            for f in r.buffered_flits():
                if not f.packet.dropped:
                    count += 1
        if self.wireless is not None:
            for q in self.wireless.queues.values():
                for p in q:
                    if not p.dropped:
                        count += p.length
            if self.wireless.current_tx is not None:
                count += self.wireless.current_tx[0].length
            for entry in self.reassembly.values():
                count += entry[0]
        return count

    def _check_conservation(self):
        residual = 0
        for r in self.routers:
            for vcq in r.inputs.values():
                for f in vcq.queue:
                    residual += 0 if f.packet.dropped else 1
            for f in r.local.queue:
                residual += 0 if f.packet.dropped else 1
        for _, _, f in self.pending:
            residual += 0 if f.packet.dropped else 1
        residual += sum(self.eject_progress.values())
        lazily_dropped = 0
        for r in self.routers:
            for f in r.buffered_flits():
                if f.packet.dropped:
                    lazily_dropped += 1
        for _, _, f in self.pending:
            if f.packet.dropped:
                lazily_dropped += 1
        if self.wireless is not None:
            for q in self.wireless.queues.values():
                for p in q:
                    residual += p.length
            if self.wireless.current_tx is not None:
                residual += self.wireless.current_tx[0].length
            for entry in self.reassembly.values():
                residual += entry[0]
        accounted = (
            self.delivered_flits + self.dropped_flits + lazily_dropped + residual
        )
        if accounted != self.injected_flits:
            raise AssertionError(
                f"flit conservation violated: injected {self.injected_flits}, "
                f"accounted {accounted}"
            )
        self.residual_flits = residual

    def _report(self, wall):
        lat = np.asarray(self.measured_latencies, dtype=float)
        avg = float(lat.mean()) if lat.size else 0.0
        p99 = float(np.percentile(lat, 99)) if lat.size else 0.0
        throughput = self.measured_delivered_flits / (self.n * self.cfg.measure_cycles)
        n_links = sum(self.topo.degree(u) for u in range(self.n))
        util = {
            link: busy / self.cfg.measure_cycles
            for link, busy in sorted(self.link_busy.items())
        }
        mean_util = sum(util.values()) / n_links if n_links else 0.0
        wireless_share = (
            self.wireless_delivered / self.delivered_packets
            if self.delivered_packets
            else 0.0
        )
        return MetricsReport(
            delivered=self.delivered_packets,
            dropped=self.dropped_packets,
            injected=self.injected_packets,
            residual=self.residual_flits,
            avg_latency=avg,
            p99_latency=p99,
            throughput=throughput,
            utilization=mean_util,
            per_link_utilization=util,
            wireless_share=wireless_share,
            livelock=self.livelock_violations,
            deadlock=0,
            wall_time=wall,
        )


def run(config):
    return Simulation(config).run()


def zero_load_latency(switching, hops, flits, pipeline):
    """Closed-form single-packet latency on an idle network."""
    if switching == fabric.SAF:
        return hops * (flits + pipeline)
    return hops * (1 + pipeline) + (flits - 1)


def measure_saturation(config, rate_grid):
    """Lowest grid rate whose average latency exceeds 3x the zero-load
    latency; the zero-load point is the grid's first rate (<= 0.01)."""
    rates = list(rate_grid)
    if not rates or any(b <= a for a, b in zip(rates, rates[1:])):
        raise ConfigError("rate_grid must be strictly increasing")
    if not 0 < rates[0] <= 0.01:
        raise ConfigError("first grid rate must be in (0, 0.01] for the zero-load point")
    zero_load = None
    seen = []
    for rate in rates:
        cfg = replace(config, traffic=replace(config.traffic, injection_rate=rate))
        report = run(cfg)
        seen.append((rate, report.avg_latency))
        if zero_load is None:
            zero_load = report.avg_latency
            continue
        if report.avg_latency > 3 * zero_load:
            return SaturationResult(rate, True, zero_load, tuple(seen))
    return SaturationResult(rates[-1], False, zero_load, tuple(seen))
