"""Augmented-system solvers and the Newton-system reduction."""

from .base import (BACKENDS, DegenerateTau, KKTSolver, NumericalBreakdown, PreconditionError,
                   UnsupportedMatrixKind, setup)
from . import dense, ldl  # noqa: F401  (register backends)
from .newton import Direction, NewtonContext, NewtonRHS, newton_solve

__all__ = [
    "BACKENDS", "DegenerateTau", "Direction", "KKTSolver", "NewtonContext", "NewtonRHS",
    "NumericalBreakdown", "PreconditionError", "UnsupportedMatrixKind", "newton_solve", "setup",
]
