"""Exception types shared across the package."""


class HsparseError(Exception):
    """Base class for all package-specific errors."""


class InvalidHypergraphError(HsparseError, ValueError):
    """A raw hypergraph description violates a structural invariant."""


class SingletonEdgeError(InvalidHypergraphError):
    """A hyperedge has fewer than two vertices."""


class NonpositiveWeightError(InvalidHypergraphError):
    """A hyperedge weight is not a finite positive number."""


class VertexOutOfRangeError(InvalidHypergraphError):
    """A vertex id is not an integer in [0, n)."""


class DuplicateVertexError(InvalidHypergraphError):
    """A vertex id occurs more than once inside one hyperedge."""


class DisconnectedError(HsparseError):
    """An operation requiring a connected support graph got a disconnected one."""


class DisconnectedPairError(DisconnectedError):
    """Effective resistance requested between vertices in different components."""


class SingularMatrixError(HsparseError):
    """The shifted Laplacian is numerically singular (disconnected support)."""


class ZeroEnergyDirectionError(HsparseError, ValueError):
    """Relative error is undefined on a direction with zero reference energy."""


class TooLargeError(HsparseError, ValueError):
    """Exhaustive cut enumeration requested beyond the supported vertex count."""
