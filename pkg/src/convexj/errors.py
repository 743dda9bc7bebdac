"""Exception hierarchy shared by all modules."""


class InvalidShapeError(ValueError):
    """Input does not describe a valid planar convex body."""


class DegenerateInputError(InvalidShapeError):
    """Point set is collinear or otherwise spans no area."""


class SolverError(RuntimeError):
    """A numerical routine failed to produce a trustworthy answer."""


class ConsistencyError(SolverError):
    """An internal invariant that should hold for convex inputs was violated."""


class MeshTooCoarseError(SolverError):
    pass


class OptimizationError(SolverError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []
