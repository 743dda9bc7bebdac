"""Cheeger constants, Dirichlet eigenvalues and the ratio J = lambda_1 / h_1^2
for planar convex polygons."""

from .cheeger import CheegerSolution, cheeger_constant, validate_cheeger
from .errors import (
    ConsistencyError,
    DegenerateInputError,
    InvalidShapeError,
    MeshTooCoarseError,
    OptimizationError,
    SolverError,
)
from .functionals import FunctionalReport, evaluate
from .geometry import ConvexPolygon, diameter, inradius, inward_offset, steiner_symmetrize
from .shapeopt import PerturbationField, dJ, fd_validate, minimize_J, optimality_residual, shape_gradient
from .spectral import SpectralSolution, lambda1_extrapolated, lambda1_fem

__all__ = [
    "CheegerSolution",
    "ConsistencyError",
    "ConvexPolygon",
    "DegenerateInputError",
    "FunctionalReport",
    "InvalidShapeError",
    "MeshTooCoarseError",
    "OptimizationError",
    "PerturbationField",
    "SolverError",
    "SpectralSolution",
    "cheeger_constant",
    "dJ",
    "diameter",
    "evaluate",
    "fd_validate",
    "inradius",
    "inward_offset",
    "lambda1_extrapolated",
    "lambda1_fem",
    "minimize_J",
    "optimality_residual",
    "shape_gradient",
    "steiner_symmetrize",
    "validate_cheeger",
]
