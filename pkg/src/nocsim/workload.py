"""Synthetic traffic generation and fault schedules.

Injection randomness is counter-based: every draw is a pure function of
(seed, node, cycle, draw index), so the sequence is identical no matter in
which order nodes are evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    ConfigError,
    InvertedInterval,
    ScheduleSyntaxError,
    UnknownElement,
)

UNIFORM_RANDOM = "uniform_random"
TRANSPOSE = "transpose"
HOTSPOT = "hotspot"
PERMUTATION = "permutation"

PATTERNS = (UNIFORM_RANDOM, TRANSPOSE, HOTSPOT, PERMUTATION)

_M64 = (1 << 64) - 1


def _mix(x):
    """splitmix64 finalizer."""
    x &= _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def stream_u64(seed, node, cycle, draw=0):
    """Counter-based u64 keyed by (seed, node, cycle, draw)."""
    h = _mix(seed ^ 0x9E3779B97F4A7C15)
    h = _mix(h ^ node)
    h = _mix(h ^ (cycle * 0xD1B54A32D192ED03))
    return _mix(h ^ (draw * 0x8CB92BA72F3D8DD7))


def stream_float(seed, node, cycle, draw=0):
    return stream_u64(seed, node, cycle, draw) / float(1 << 64)


@dataclass(frozen=True)
class TrafficSpec:
    pattern: str = UNIFORM_RANDOM
    injection_rate: float = 0.1       # flits/node/cycle
    packet_length: int = 4
    seed: int = 0
    hotspot_node: int = 0
    hotspot_fraction: float = 0.5
    permutation: tuple = None         # node -> destination, for PERMUTATION

    def __post_init__(self):
        if not 0.0 <= self.injection_rate <= 1.0:
            raise ConfigError("injection_rate must be in [0,1]")
        if self.pattern == HOTSPOT and not 0.0 <= self.hotspot_fraction <= 1.0:
            raise ConfigError("hotspot_fraction must be in [0,1]")
        if self.pattern not in PATTERNS:
            raise ConfigError(f"unknown traffic pattern {self.pattern!r}")
        if self.pattern == PERMUTATION and self.permutation is None:
            raise ConfigError("permutation pattern needs a permutation table")
        if self.packet_length < 1:
            raise ConfigError("packet_length must be >= 1")


def transpose_destination(topology, node):
    """(x, y) -> (y, x) on a square grid."""
    w, h = topology.grid_shape()
    if w != h:
        raise ConfigError("transpose traffic needs a square grid")
    x, y = topology.node_xy(node)
    return topology.xy_node(y, x)


def complement_destination(topology, node):
    """(x, y) -> (w-1-x, h-1-y): the corner-to-corner permutation."""
    w, h = topology.grid_shape()
    x, y = topology.node_xy(node)
    return topology.xy_node(w - 1 - x, h - 1 - y)


def inject(spec, topology, node, cycle, alive=None):
    """Destination of the packet this node generates this cycle, or None.

    A packet appears with probability rate/packet_length, keeping the
    offered load in flits equal to the rate. Dead uniform-random
    destinations are resampled (bounded retries); other patterns return
    their destination regardless and leave fault handling to the engine.
    """
    if spec.injection_rate <= 0.0:
        return None
    prob = spec.injection_rate / spec.packet_length
    if stream_float(spec.seed, node, cycle, 0) >= prob:
        return None
    n = topology.node_count
    if spec.pattern == TRANSPOSE:
        dst = transpose_destination(topology, node)
        return None if dst == node else dst
    if spec.pattern == PERMUTATION:
        dst = spec.permutation[node]
        return None if dst == node else dst
    if spec.pattern == HOTSPOT:
        if stream_float(spec.seed, node, cycle, 1) < spec.hotspot_fraction:
            return None if spec.hotspot_node == node else spec.hotspot_node
        # fall through to uniform for the non-hotspot share
    for attempt in range(100):
        u = stream_u64(spec.seed, node, cycle, 2 + attempt)
        dst = u % (n - 1)
        if dst >= node:
            dst += 1  # uniform over nodes != self
        if alive is None or alive(dst):
            return dst
    return None


INFINITY = math.inf


@dataclass(frozen=True)
class FaultEvent:
    element: tuple   # ("node", id) or ("link", u, v)
    down_cycle: int
    up_cycle: float  # may be math.inf for permanent faults

    def active(self, cycle):
        return self.down_cycle <= cycle < self.up_cycle


@dataclass(frozen=True)
class FaultSchedule:
    events: tuple = ()

    def change_cycles(self):
        """Cycles at which the failed sets may change."""
        cycles = set()
        for ev in self.events:
            cycles.add(ev.down_cycle)
            if ev.up_cycle != INFINITY:
                cycles.add(int(ev.up_cycle))
        return sorted(cycles)


def faults_at(schedule, topology, cycle):
    """(failed node set, failed directed link set) for the half-open fault
    intervals [down, up); node failure implies all incident links. A link
    event takes down both directions of the physical link."""
    nodes = set()
    links = set()
    for ev in schedule.events:
        if not ev.active(cycle):
            continue
        if ev.element[0] == "node":
            nodes.add(ev.element[1])
        else:
            _, u, v = ev.element
            links.add((u, v))
            links.add((v, u))
    for u in nodes:
        for v in topology.neighbors(u):
            links.add((u, v))
            links.add((v, u))
    return nodes, links


def parse_fault_schedule(text, topology):
    """One event per line: 'node <id> <down> <up|inf>' or
    'link <u> <v> <down> <up|inf>'. Blank lines and #-comments allowed."""
    events = []
    for ln_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "node":
            if len(parts) != 4:
                raise ScheduleSyntaxError("expected 'node <id> <down> <up|inf>'", ln_no)
            node = _parse_int(parts[1], ln_no, raw.find(parts[1]) + 1)
            down = _parse_int(parts[2], ln_no, raw.find(parts[2]) + 1)
            up = _parse_up(parts[3], ln_no, raw.find(parts[3]) + 1)
            if not 0 <= node < topology.node_count:
                raise UnknownElement(f"line {ln_no}: node {node} not in topology")
            element = ("node", node)
        elif kind == "link":
            if len(parts) != 5:
                raise ScheduleSyntaxError(
                    "expected 'link <u> <v> <down> <up|inf>'", ln_no
                )
            u = _parse_int(parts[1], ln_no, raw.find(parts[1]) + 1)
            v = _parse_int(parts[2], ln_no, raw.find(parts[2]) + 1)
            down = _parse_int(parts[3], ln_no, raw.find(parts[3]) + 1)
            up = _parse_up(parts[4], ln_no, raw.find(parts[4]) + 1)
            if not (
                0 <= u < topology.node_count
                and 0 <= v < topology.node_count
                and topology.has_link(u, v)
            ):
                raise UnknownElement(f"line {ln_no}: link {u} {v} not in topology")
            element = ("link", u, v)
        else:
            raise ScheduleSyntaxError(f"unknown element kind {kind!r}", ln_no)
        if down >= up:
            raise InvertedInterval(f"line {ln_no}: down {down} >= up {up}")
        events.append(FaultEvent(element, down, up))
    return FaultSchedule(tuple(events))


def _parse_int(token, line, col):
    try:
        return int(token)
    except ValueError:
        raise ScheduleSyntaxError(f"expected integer, got {token!r}", line, col) from None


def _parse_up(token, line, col):
    if token == "inf":
        return INFINITY
    return _parse_int(token, line, col)
