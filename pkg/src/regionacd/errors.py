"""Exception types shared across the toolkit."""


class RegionAcdError(Exception):
    """Base class for all toolkit errors."""


class ParseError(RegionAcdError):
    """Mesh file is malformed or references out-of-range indices."""


class IoError(RegionAcdError):
    """Filesystem read or write failed."""


class NotWatertight(RegionAcdError):
    """Operation requires a closed 2-manifold surface."""


class EmptyMesh(RegionAcdError):
    """Mesh has no usable (positive-area) faces."""


class DegenerateInput(RegionAcdError):
    """Point set is coincident, collinear or coplanar where a 3D hull is required."""


class CapFailure(RegionAcdError):
    """Cross-section loops of a clip are non-manifold and cannot be capped."""


class NoConvergence(RegionAcdError):
    """Iterative distance query failed to converge; retry with a perturbed pose."""


class NoValidPlane(RegionAcdError):
    """Every candidate split plane produced a degenerate child."""


class BudgetExhausted(RegionAcdError):
    """Part budget ran out before the tolerance was met everywhere."""


class OverlappingRegions(RegionAcdError):
    """Two selection boxes have overlapping interiors."""


class EmptyRegion(RegionAcdError):
    """Selection box does not intersect the mesh."""


class NoSamplesInRegion(RegionAcdError):
    """Region box contains no surface to sample."""


class ClearanceViolation(RegionAcdError):
    """Benchmark scene could not be jittered into a contact-free start."""


class EmptyInput(RegionAcdError):
    """An aggregate operation received nothing to aggregate."""
