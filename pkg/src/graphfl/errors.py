"""Error types shared across the package.

Everything raised here derives from GraphFLError so callers can catch a single
base class. Names state the condition being reported.
"""


class GraphFLError(Exception):
    """Base class for all graphfl errors."""


class VertexOutOfRange(GraphFLError, IndexError):
    """A vertex id is negative or >= n_vertices."""


class Disconnected(GraphFLError):
    """An operation that needs a connected (sub)graph found more than one piece."""


class OddDegreePresent(GraphFLError):
    """An Eulerian circuit was requested on a graph with odd-degree vertices."""


class WrongOddCount(GraphFLError):
    """An Eulerian trail was requested between vertices that are not exactly
    the graph's two odd-degree vertices."""


class Unreachable(GraphFLError):
    """No path exists between the requested vertices."""


class DimensionMismatch(GraphFLError, ValueError):
    """Array shapes disagree with the graph or with each other."""


class LengthMismatch(GraphFLError, ValueError):
    """Two vectors that must be the same length are not."""


class NonFiniteDerivative(GraphFLError, ArithmeticError):
    """A loss derivative evaluated to nan or inf during a Newton step."""


class DensityBelowTree(GraphFLError, ValueError):
    """Requested sparsity leaves fewer edges than a spanning tree needs."""


class BlobsDontFit(GraphFLError, ValueError):
    """Requested blobs cannot be placed disjointly on the graph."""


class ParseError(GraphFLError, ValueError):
    """A file could not be parsed. Carries the 1-based offending line number
    when one is known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NotCoordinateFormat(ParseError):
    """A Matrix Market file is not in coordinate format."""
