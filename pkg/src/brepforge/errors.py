"""Exception types shared across the generator pipeline."""


class BrepForgeError(Exception):
    """Base class for all generator errors."""


class InvalidFootprintError(BrepForgeError):
    """Loop is degenerate, self-intersecting, or collapses below 4 vertices."""


class MustCleanFirstError(BrepForgeError):
    """Operation requires a cleaned loop (no collinear or coincident triples)."""


class CollisionError(BrepForgeError):
    """Interiors of two shapes overlap."""


class ConflictError(BrepForgeError):
    """Union would be non-simple, pinched, or touch only partially/point-wise."""


class OffsetTooLargeError(BrepForgeError):
    """Erosion distance collapses the inner loop."""


class ProductionInfeasibleError(BrepForgeError):
    """No legal room rectangle fits at the chosen vertex."""


class GrowthFailedError(BrepForgeError):
    """Grammar produced fewer than two rooms; sample must be discarded."""


class InconsistentPlanError(BrepForgeError):
    """Room rectangles do not tile the storey footprint exactly."""


class UnreachableRoomError(BrepForgeError):
    """Room adjacency graph is disconnected; no door layout can fix access."""


class InvalidExtrusionError(BrepForgeError):
    """Degenerate polygon or non-positive height passed to an extrusion."""


class BooleanFailureError(BrepForgeError):
    """Opening box does not pierce a wall slab cleanly."""


class MergeConflictError(BrepForgeError):
    """Solids interpenetrate or touch in a way face cancellation cannot express."""


class AssemblyInconsistencyError(BrepForgeError):
    """Building-level construction invariant violated (e.g. atrium outside slab)."""


class EmptyMeshError(BrepForgeError):
    """Triangle mesh has zero total area; cannot sample points."""
