"""Regularized homogeneous self-dual interior-point solver for linear programs."""

__version__ = "0.1.0"

from .arith import FLOAT64, Extended, get_arithmetic
from .block_angular import UnitBlockAngularMatrix
from .ipm import Parameters
from .mps_io import parse_mps, read_mps, write_mps, write_solution
from .presolve import postsolve, presolve
from .problem import GeneralLP, Solution, StandardLP, Status, to_standard_form
from .solver import solve

__all__ = [
    "FLOAT64", "Extended", "GeneralLP", "Parameters", "Solution", "StandardLP", "Status",
    "UnitBlockAngularMatrix", "get_arithmetic", "parse_mps", "postsolve", "presolve", "read_mps",
    "solve", "to_standard_form", "write_mps", "write_solution", "__version__",
]
