"""Exception hierarchy shared by all cantorqc modules."""


class CantorQCError(Exception):
    """Base class for every error raised by this package."""


class InvalidSequenceError(CantorQCError, ValueError):
    """A gap sequence emitted a value outside (0, 1) or ran out of terms."""


class NoLowerBoundError(CantorQCError, ValueError):
    """No positive lower bound can be derived for a gap sequence."""


class DecompositionError(CantorQCError):
    """Two circles of a pants decomposition intersect."""


class GeometryError(CantorQCError):
    """A normalized or scaled pair of pants has inconsistent radii."""


class MapDomainError(CantorQCError, ValueError):
    """A point was passed to a map outside its closed domain."""


class DegenerateMapError(CantorQCError):
    """A finite-difference Beltrami estimate reached |mu| >= 1."""
