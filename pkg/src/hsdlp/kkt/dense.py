"""Dense normal-equations backend.

Eliminates dx and factorizes ``S = A D^{-1} A^T + rho_d I`` with
``D = Theta^{-1} + rho_p``.  Double precision goes through LAPACK Cholesky;
object arrays through the generic :func:`ldl_dense` below.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ..arith import FLOAT64, Arithmetic
from .base import KKTSolver, NumericalBreakdown, UnsupportedMatrixKind, register


def ldl_dense(S):
    """In-place-free LDL^T of a symmetric positive definite matrix (any scalar type).

    Returns ``(L, d)`` with unit lower-triangular ``L``.  Raises
    :class:`NumericalBreakdown` on a non-positive pivot.
    """
    m = S.shape[0]
    L = np.array(S, dtype=object if S.dtype == object else float, copy=True)
    d = np.empty(m, dtype=L.dtype)
    for j in range(m):
        if j:
            w = L[j, :j] * d[:j]
            dj = L[j, j] - np.dot(L[j, :j], w)
        else:
            w = None
            dj = L[j, j]
        if not dj > 0:
            raise NumericalBreakdown(f"non-positive pivot {float(dj):.3e} at column {j}")
        d[j] = dj
        if j + 1 < m:
            col = L[j + 1:, j]
            if j:
                col = col - L[j + 1:, :j] @ w
            L[j + 1:, j] = col / dj
        L[j, j] = 1
        L[j, j + 1:] = 0
    return L, d


def ldl_dense_solve(L, d, b):
    """Solve ``L diag(d) L^T x = b`` with the output of :func:`ldl_dense`."""
    m = len(d)
    x = np.array(b, copy=True)
    for j in range(m):
        if j:
            x[j] = x[j] - np.dot(L[j, :j], x[:j])
    x = x / d
    for j in range(m - 1, -1, -1):
        if j + 1 < m:
            x[j] = x[j] - np.dot(L[j + 1:, j], x[j + 1:])
    return x


@register("dense")
class DenseNormalSolver(KKTSolver):
    backend = "dense Cholesky"
    system = "normal equations"

    def __init__(self, A, arith: Arithmetic = FLOAT64):
        if not (isinstance(A, np.ndarray) or sp.issparse(A) or hasattr(A, "to_dense")):
            raise UnsupportedMatrixKind(f"dense backend cannot use {type(A).__name__}")
        super().__init__(A, arith)
        if sp.issparse(A):
            A = A.toarray()
        elif not isinstance(A, np.ndarray):
            A = A.to_dense()
        self.Ad = arith.asarray(A) if arith.dtype == object else np.asarray(A, dtype=float)
        self.S = None
        self._chol = None

    def _factorize(self):
        Dinv = 1 / (1 / self.theta + self.rho_p)
        self.Dinv = Dinv
        A = self.Ad
        S = (A * Dinv) @ A.T
        S[np.diag_indices_from(S)] += self.rho_d
        self.S = S
        if self.arith.dtype == object:
            self._chol = ldl_dense(S)
        else:
            if not np.all(np.isfinite(S)):
                raise NumericalBreakdown("non-finite normal matrix")
            try:
                self._chol = sla.cho_factor(S, lower=True, check_finite=False)
            except np.linalg.LinAlgError as exc:
                raise NumericalBreakdown(str(exc)) from None
            piv = np.diag(self._chol[0]) ** 2
            if np.any(piv <= 4 * self.arith.eps * np.abs(np.diag(S))):
                raise NumericalBreakdown("numerically singular normal matrix")

    def _solve(self, xi_d, xi_p):
        A = self.Ad
        rhs = xi_p + A @ (self.Dinv * xi_d)
        if self.arith.dtype == object:
            dy = ldl_dense_solve(*self._chol, rhs)
        else:
            dy = sla.cho_solve(self._chol, rhs, check_finite=False)
        dx = self.Dinv * (A.T @ dy - xi_d)
        return dx, dy
