"""
Sync Errors – v1.0

Exception types shared by the synchronizing-sequence toolkit.
Report-style checks never raise; everything else funnels through these.
"""


class SyncError(Exception):
    """Base class for every toolkit error."""


class NetStructureError(SyncError, ValueError):
    """Malformed net, wrong dimensions, or a net outside the class an operation needs."""


class NetInputError(SyncError, ValueError):
    """Unknown identifier, unreachable target, partial automaton."""


class NetParseError(NetInputError):
    """Net document could not be decoded."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class BoundednessError(SyncError, RuntimeError):
    """Reachability graph grew past its node budget."""

    def __init__(self, budget):
        self.budget = budget
        super().__init__(
            f"reachability graph exceeded the node budget of {budget:,} markings "
            "(net unbounded or budget too small)"
        )


class SearchTimeoutError(SyncError, RuntimeError):
    """Wall-clock budget ran out."""


class ObstructionError(SyncError, RuntimeError):
    """More than one ergodic component: no SS exists for token-count uncertainty."""

    def __init__(self, ergodic):
        self.ergodic = ergodic
        super().__init__(f"net has {ergodic} ergodic components; a synchronizing sequence needs exactly one")


class VerificationError(SyncError, RuntimeError):
    """A computed sequence failed simulation."""


class GenerationError(SyncError, RuntimeError):
    """Random net generation could not satisfy its parameters."""
