"""Exception hierarchy shared by all nocsim modules."""


class NocError(Exception):
    """Base class for all nocsim errors."""


# --- topology ---

class InvalidParams(NocError):
    """Topology generator parameters are out of range or inconsistent."""


class Disconnected(NocError):
    """An operation that requires a connected graph found an unreachable pair."""


class Infeasible(NocError):
    """No topology satisfies the synthesis constraints."""


# --- addressing ---

class EmptyAnchors(NocError):
    pass


class DuplicateAnchor(NocError):
    pass


class KTooLarge(NocError):
    pass


class DimensionMismatch(NocError):
    pass


class EmptyCenters(NocError):
    pass


# --- routing ---

class WrongTopologyKind(NocError):
    """Routing algorithm applied to an incompatible topology family."""


class CoordinateAliasing(NocError):
    """A non-destination node carries the destination's coordinate vector."""


class Unreachable(NocError):
    """Destination cannot be reached over the alive view."""


class BudgetExceeded(NocError):
    """Route enumeration exceeded its configured cap."""


# --- fabric ---

class ProtocolViolation(NocError):
    """Flow-control contract broken (e.g. body flit with no bound packet)."""


# --- workload ---

class UnknownElement(NocError):
    """Fault schedule references a node or link missing from the topology."""


class InvertedInterval(NocError):
    """Fault event with down_cycle >= up_cycle."""


class ScheduleSyntaxError(NocError):
    """Malformed fault-schedule line; carries line/column info."""

    def __init__(self, message, line, column=1):
        super().__init__(f"line {line}, col {column}: {message}")
        self.line = line
        self.column = column


# --- engine ---

class ConfigError(NocError):
    pass


class LivelockDetected(NocError):
    pass


class DeadlockDetected(NocError):
    pass


# --- cli / config parsing ---

class ConfigSyntaxError(ConfigError):
    def __init__(self, message, line, column=1):
        super().__init__(f"line {line}, col {column}: {message}")
        self.line = line
        self.column = column


class UnknownKey(ConfigError):
    pass


class TypeMismatch(ConfigError):
    pass


class MissingRequired(ConfigError):
    pass
