"""Cycle-level network-on-chip simulation workbench.

Topology generation and synthesis, virtual-coordinate greedy routing with
neighborhood-method fallback, channel-dependency deadlock analysis, a
credit-based wormhole/VCT/SAF fabric with an optional wireless token-MAC
overlay, and a deterministic sweep engine.
"""

from . import addressing, engine, fabric, routing, topology, workload  # noqa: F401
from .engine import MetricsReport, SimConfig, WirelessConfig, run  # noqa: F401

__version__ = "0.1.0"
