"""Cycle-level router fabric: flits, input-queued routers with credit-based
backpressure, the three buffering policies, and the wireless hub overlay
with its token-passing MAC.

Timing model (unit flits, unit-width links):
  * a flit entering an input VC at cycle t is pipeline-ready at t + P;
  * a flit sent at cycle t arrives downstream at t + 1;
  * SAF additionally holds every flit until its packet's tail has arrived
    in the same buffer, so the head leaves at tail_arrival + P.
This yields the zero-load closed forms H*(F+P) for SAF and
H*(1+P) + (F-1) for wormhole and virtual cut-through.
"""

from __future__ import annotations

from collections import deque

from .errors import ProtocolViolation

HEAD = "head"
BODY = "body"
TAIL = "tail"
HEAD_TAIL = "head_tail"

SAF = "saf"
VCT = "vct"
WORMHOLE = "wormhole"

SWITCHING_POLICIES = (SAF, VCT, WORMHOLE)

LOCAL = -2  # input "port" for the node's own injection queue


class Packet:
    __slots__ = (
        "pid", "src", "dst", "length", "inject_cycle", "measured",
        "wireless", "reinjected", "route", "route_index", "final_dst",
        "dropped", "hops",
    )

    def __init__(self, pid, src, dst, length, inject_cycle, measured=False):
        self.pid = pid
        self.src = src
        self.dst = dst          # current wired target (a hub for wireless legs)
        self.final_dst = dst
        self.length = length
        self.inject_cycle = inject_cycle
        self.measured = measured
        self.wireless = False
        self.reinjected = False
        self.dropped = False
        self.hops = 0           # wired hops completed before a radio leg
        self.route = None       # source route (node list) or None
        self.route_index = None  # node -> position lookup for source routes

    def set_route(self, route):
        self.route = tuple(route)
        self.route_index = {node: i for i, node in enumerate(self.route)}

    def __repr__(self):
        return f"Packet({self.pid}, {self.src}->{self.dst}, len={self.length})"


class Flit:
    __slots__ = ("packet", "kind", "seq", "hop_count", "arrival", "vc")

    def __init__(self, packet, kind, seq):
        self.packet = packet
        self.kind = kind
        self.seq = seq
        self.hop_count = 0
        self.arrival = 0   # cycle this flit entered its current buffer
        self.vc = 0

    @property
    def is_head(self):
        return self.kind in (HEAD, HEAD_TAIL)

    @property
    def is_tail(self):
        return self.kind in (TAIL, HEAD_TAIL)


def make_flits(packet):
    """Head, bodies, tail (or a single head_tail for 1-flit packets)."""
    if packet.length == 1:
        return [Flit(packet, HEAD_TAIL, 0)]
    flits = [Flit(packet, HEAD, 0)]
    flits += [Flit(packet, BODY, i) for i in range(1, packet.length - 1)]
    flits.append(Flit(packet, TAIL, packet.length - 1))
    return flits


class InputVC:
    """One virtual-channel FIFO of an input port.

    Bound to a single packet from head acceptance until its tail departs;
    ``decision`` caches the routing choice made for the bound packet's head
    so body flits follow the same output.
    """

    __slots__ = ("depth", "queue", "bound", "tail_arrived", "decision")

    def __init__(self, depth):
        self.depth = depth
        self.queue = deque()
        self.bound = None         # packet currently owning this VC
        self.tail_arrived = None  # cycle the bound packet's tail arrived
        self.decision = None      # (out_port, out_vc, next_node) for bound packet

    @property
    def occupancy(self):
        return len(self.queue)

    @property
    def free_slots(self):
        return self.depth - len(self.queue)

    def push(self, flit, cycle):
        if flit.is_head:
            self.bound = flit.packet
            self.tail_arrived = None
        elif self.bound is None:
            raise ProtocolViolation("body flit arrived with no bound packet")
        if flit.is_tail:
            self.tail_arrived = cycle
        flit.arrival = cycle
        self.queue.append(flit)

    def pop(self):
        flit = self.queue.popleft()
        if flit.is_tail:
            self.bound = None
            self.tail_arrived = None
            self.decision = None
        return flit


def flow_control_accept(policy, buffer_state, flit, packet_length):
    """Downstream acceptance rule for one incoming flit.

    SAF and VCT accept a head only when the whole packet fits; wormhole
    accepts any flit into a single free slot. Body/tail flits of the bound
    packet are always accepted (space was reserved or freed ahead of them);
    a body flit with no bound packet is a protocol violation.
    """
    if policy not in SWITCHING_POLICIES:
        raise ValueError(f"unknown switching policy {policy!r}")
    if flit.is_head:
        if buffer_state.bound is not None and buffer_state.bound is not flit.packet:
            return False
        if policy in (SAF, VCT):
            return buffer_state.free_slots >= packet_length
        return buffer_state.free_slots >= 1
    if buffer_state.bound is None:
        raise ProtocolViolation("body flit with no bound packet")
    if buffer_state.bound is not flit.packet:
        return False
    if policy in (SAF, VCT):
        return True  # space reserved at head acceptance
    return buffer_state.free_slots >= 1


def flit_ready(policy, vc_state, flit, now, pipeline):
    """Sender-side readiness of the head-of-line flit."""
    if policy == SAF:
        if vc_state.tail_arrived is None:
            return False
        return now >= vc_state.tail_arrived + pipeline
    return now >= flit.arrival + pipeline


class LocalQueue:
    """Unbounded open-loop injection queue of one node.

    Whole packets are appended atomically (all flits share one arrival
    cycle), so SAF readiness reduces to the plain pipeline delay. The
    routing decision for the head-of-line packet is cached until its tail
    departs.
    """

    __slots__ = ("queue", "decision")

    def __init__(self):
        self.queue = deque()
        self.decision = None  # (pid, out_port, out_vc, next_node)

    def push_packet(self, flits, cycle):
        for f in flits:
            f.arrival = cycle
            self.queue.append(f)

    def pop(self):
        flit = self.queue.popleft()
        if flit.is_tail:
            self.decision = None
        return flit


class RouterState:
    """Per-node input buffers, arbitration pointers, and counters.

    Wired input port indices mirror the topology's neighbor-slot ports;
    the local queue is the node's open-loop injection source.
    """

    def __init__(self, node, n_ports, vc_count, depth):
        self.node = node
        self.vc_count = vc_count
        self.inputs = {
            (port, vc): InputVC(depth)
            for port in range(n_ports)
            for vc in range(vc_count)
        }
        self.local = LocalQueue()
        self.rr = [0] * n_ports  # round-robin pointer per output port
        self.link_busy = [0] * n_ports  # utilization counters (send events)

    def congestion(self):
        """Total wired buffered flits; feeds DyXY's occupancy signal."""
        return sum(len(vc.queue) for vc in self.inputs.values())

    def buffered_flits(self):
        for vc in self.inputs.values():
            yield from vc.queue
        yield from self.local.queue


class WirelessHubState:
    """Single shared radio channel with round-robin token MAC.

    At most one hub transmits per cycle; a transmission occupies the channel
    for ``w_cycles`` and delivers the queued packet to the hub nearest its
    destination. An idle token holder passes the token in one cycle, and the
    token also advances after every completed transmission.
    """

    def __init__(self, hubs, w_cycles, queue_cap):
        self.hubs = tuple(hubs)
        self.w_cycles = w_cycles
        self.queue_cap = queue_cap
        self.token = 0  # index into hubs
        self.queues = {h: deque() for h in self.hubs}
        self.busy_until = None   # first cycle the channel is free again
        self.current_tx = None   # (packet, dest_hub)
        self.transmit_cycles = 0  # cumulative busy cycles (invariant checks)

    def nearest_hub(self, node, hop_dist):
        """Hub minimizing wired hop distance; ties to the lowest hub id."""
        return min(self.hubs, key=lambda h: (hop_dist[h][node], h))

    def enqueue(self, hub, packet):
        self.queues[hub].append(packet)

    def queued_packets(self):
        total = 0
        for q in self.queues.values():
            total += len(q)
        if self.current_tx is not None:
            total += 1
        return total

    def step(self, now, dest_hub_of):
        """Advance the MAC one cycle; returns [(packet, dest_hub)] completed
        this cycle. ``dest_hub_of(packet)`` names the receiving hub."""
        delivered = []
        if self.busy_until is not None:
            if now < self.busy_until:
                self.transmit_cycles += 1
                return delivered
            delivered.append(self.current_tx)
            self.current_tx = None
            self.busy_until = None
            self.token = (self.token + 1) % len(self.hubs)
        holder = self.hubs[self.token]
        q = self.queues[holder]
        if q:
            packet = q.popleft()
            self.current_tx = (packet, dest_hub_of(packet))
            self.busy_until = now + self.w_cycles
            self.transmit_cycles += 1
        else:
            self.token = (self.token + 1) % len(self.hubs)
        return delivered


def wireless_admission(wired_distance, distance_threshold, hub_queue_len, queue_cap):
    """Admit a packet to the wireless overlay only when its wired trip is
    long enough and the nearest hub's queue has room."""
    return wired_distance >= distance_threshold and hub_queue_len < queue_cap
