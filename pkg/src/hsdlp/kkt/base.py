"""Black-box augmented-system solver interface.

Every backend solves systems of the form::

    [ -(Theta^{-1} + rho_p I)   A^T    ] [dx]   [xi_d]
    [          A              rho_d I  ] [dy] = [xi_p]

through three entry points: construction (``setup``), :meth:`KKTSolver.update`
(new diagonal and regularizations, i.e. refactorize) and
:meth:`KKTSolver.solve`.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from ..arith import FLOAT64, Arithmetic, norm_inf
from .. import linalg


class NumericalBreakdown(RuntimeError):
    """Factorization produced a zero, non-finite or wrong-signed pivot."""


class DegenerateTau(NumericalBreakdown):
    """The scalar pivot of the homogeneous variable is not positive."""


class UnsupportedMatrixKind(TypeError):
    """The backend cannot consume this representation of ``A``."""


class PreconditionError(ValueError):
    pass


class KKTSolver(ABC):
    backend = "abstract"
    system = "augmented system"
    max_refinement = 2

    def __init__(self, A, arith: Arithmetic = FLOAT64):
        self.A = A
        self.arith = arith
        self.m, self.n = A.shape
        self.theta = None
        self.rho_p = None
        self.rho_d = None
        self.n_updates = 0
        self.n_solves = 0
        self.n_refinements = 0
        self.tol = min(1e-8, float(np.sqrt(arith.eps)))

    def _check_update(self, theta, rho_p, rho_d):
        if len(theta) != self.n:
            raise PreconditionError(f"theta has length {len(theta)}, expected {self.n}")
        tf = self.arith.to_float(theta)
        if not np.all(tf > 0) or not np.all(np.isfinite(tf)):
            raise PreconditionError("theta must be finite and strictly positive")
        if float(rho_p) < 0 or float(rho_d) < 0:
            raise PreconditionError("regularizations must be non-negative")

    def update(self, theta, rho_p, rho_d) -> None:
        """Refactorize for a new diagonal ``theta`` and regularizations."""
        self._check_update(theta, rho_p, rho_d)
        self.theta = theta
        self.rho_p = rho_p
        self.rho_d = rho_d
        self.n_updates += 1
        self._factorize()

    @abstractmethod
    def _factorize(self) -> None:
        ...

    @abstractmethod
    def _solve(self, xi_d, xi_p):
        ...

    def residual(self, dx, dy, xi_d, xi_p):
        D = 1 / self.theta + self.rho_p
        rd = xi_d - (-D * dx + linalg.rmatvec(self.A, dy))
        rp = xi_p - (linalg.matvec(self.A, dx) + self.rho_d * dy)
        return rd, rp

    def solve(self, xi_d, xi_p):
        """Return ``(dx, dy)``; up to two rounds of iterative refinement."""
        if self.theta is None:
            raise PreconditionError("update must be called before solve")
        self.n_solves += 1
        dx, dy = self._solve(xi_d, xi_p)
        scale = 1 + max(float(norm_inf(xi_d)), float(norm_inf(xi_p)))
        for _ in range(self.max_refinement):
            rd, rp = self.residual(dx, dy, xi_d, xi_p)
            res = max(float(norm_inf(rd)), float(norm_inf(rp)))
            if not np.isfinite(res):
                raise NumericalBreakdown("non-finite residual in augmented solve")
            if res <= self.tol * scale:
                break
            self.n_refinements += 1
            ex, ey = self._solve(rd, rp)
            dx = dx + ex
            dy = dy + ey
        return dx, dy

    def describe(self) -> str:
        return f"{self.backend} ({self.system})"


BACKENDS = {}


def register(name):
    def deco(cls):
        BACKENDS[name] = cls
        return cls
    return deco


def setup(A, backend: str = "ldl", arith: Arithmetic = FLOAT64, **options) -> KKTSolver:
    """Instantiate the backend ``backend`` for matrix ``A``."""
    if backend not in BACKENDS:
        # the structured backend registers itself on import
        from .. import block_angular  # noqa: F401
    try:
        cls = BACKENDS[backend]
    except KeyError:
        raise ValueError(f"unknown KKT backend {backend!r}; choose from {sorted(BACKENDS)}") from None
    return cls(A, arith=arith, **options)
