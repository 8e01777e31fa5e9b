"""Exception types shared across the package."""


class StreamplanError(Exception):
    """Base class for all streamplan errors."""


class FieldBoundsError(StreamplanError, ValueError):
    """A point landed outside a flow field's domain.

    Raised on out-of-bounds queries; distinct from a collision, which is
    ordinary trajectory-termination data rather than an error.
    """


class DegeneratePairError(StreamplanError, ValueError):
    """An operation that needs two distinct points got a coincident pair."""


class HeuristicKindError(StreamplanError, ValueError):
    """An operation was asked of a distance heuristic kind that lacks it."""


class GridParseError(StreamplanError, ValueError):
    """A flow-grid file failed to parse.

    Carries the 1-based line number where parsing stopped.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidEdgeError(StreamplanError, ValueError):
    """A trajectory that did not complete was used where an edge is required."""


class InfeasibleError(StreamplanError, RuntimeError):
    """Path extraction was requested from a tree with no goal-reaching vertex."""
