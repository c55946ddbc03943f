"""Exception types shared across the package."""


class HoneyvolError(Exception):
    """Base class for all library errors."""


class NotRegular(HoneyvolError):
    """An angle vector has two (numerically) coinciding entries."""


class DegenerateBoundary(HoneyvolError):
    """A boundary class sits on the edge of the admissible region."""


class NotSolvable(HoneyvolError):
    """A divergence equation or boundary condition has no solution."""


class NotCotree(HoneyvolError):
    """The complement of the given edge set is not a spanning tree."""


class Disconnected(HoneyvolError):
    """The graph is not connected."""


class InvalidSize(HoneyvolError):
    """Grid parameters out of range."""


class InvalidColorMap(HoneyvolError):
    """A coloring violates the face or boundary rules."""


class GeometryViolation(HoneyvolError):
    """A realized honeycomb breaks a geometric condition."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending


class DimensionTooLarge(HoneyvolError):
    """Exact volume requested above the configured dimension cap."""


class InvalidTopology(HoneyvolError):
    """A surface description is inconsistent."""


class InvalidTree(HoneyvolError):
    """A loop tree description is inconsistent."""


class NonpositiveTime(HoneyvolError):
    """Heat kernel requested at a non-positive time."""


class TruncationInsufficient(HoneyvolError):
    """A truncated series did not converge to the requested tolerance."""


class NotUnivalent(HoneyvolError):
    """A sieving vertex does not have degree one."""


class Overlap(HoneyvolError):
    """Two vertex sets that must be disjoint intersect."""
