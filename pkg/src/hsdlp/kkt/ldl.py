"""Sparse LDL^T of the quasi-definite augmented matrix.

The fill-reducing ordering and the symbolic factorization (elimination tree,
column counts) are computed once in the constructor; :meth:`update` only
rewrites the two diagonal blocks and refactorizes numerically.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .._kernels import kernels_for
from ..arith import FLOAT64, Arithmetic
from ..ordering import minimum_degree
from .base import KKTSolver, NumericalBreakdown, register


@register("ldl")
class SparseLDLSolver(KKTSolver):
    backend = "sparse LDL"
    system = "augmented system"

    def __init__(self, A, arith: Arithmetic = FLOAT64, ordering: str = "mindegree",
                 compiled: bool = True):
        super().__init__(A, arith)
        m, n = self.m, self.n
        N = n + m
        if hasattr(A, "to_sparse") and not isinstance(A, np.ndarray) and not sp.issparse(A):
            Asp = A.to_sparse()
            values = arith.asarray(Asp.data) if arith.dtype == object else Asp.data
        elif isinstance(A, np.ndarray):
            Ad = np.asarray(A)
            rows, cols = np.nonzero(Ad != 0)
            vals = Ad[rows, cols]
            Asp = sp.csc_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, n))
            Asp.sort_indices()
            # keep values in CSC order, in the working arithmetic
            order = np.lexsort((rows, cols))
            values = arith.asarray(vals[order]) if arith.dtype == object else vals[order].astype(float)
        else:
            Asp = sp.csc_matrix(A, dtype=float)
            Asp.sort_indices()
            values = Asp.data if arith.dtype != object else arith.asarray(Asp.data)
        coo_rows = Asp.indices.astype(np.int64)
        coo_cols = np.repeat(np.arange(n, dtype=np.int64), np.diff(Asp.indptr))

        if ordering == "natural":
            perm = np.arange(N, dtype=np.int64)
        else:
            pattern = sp.bmat([[sp.identity(n, format="csc"), Asp.T], [Asp, sp.identity(m)]], format="csr")
            perm = minimum_degree(pattern)
        pinv = np.empty(N, dtype=np.int64)
        pinv[perm] = np.arange(N, dtype=np.int64)
        self.perm, self.pinv = perm, pinv

        # entries of the permuted upper triangle, tagged by source
        r_a = pinv[n + coo_rows]
        c_a = pinv[coo_cols]
        lo = np.minimum(r_a, c_a)
        hi = np.maximum(r_a, c_a)
        diag = pinv[np.arange(N)]
        rows_all = np.concatenate([diag, lo])
        cols_all = np.concatenate([diag, hi])
        src = np.concatenate([np.arange(N), N + np.arange(len(lo))])
        order = np.lexsort((rows_all, cols_all))
        self.Ai = rows_all[order].astype(np.int64)
        cols_sorted = cols_all[order]
        src = src[order]
        self.Ap = np.zeros(N + 1, dtype=np.int64)
        np.add.at(self.Ap, cols_sorted + 1, 1)
        np.cumsum(self.Ap, out=self.Ap)
        is_diag = src < N
        self.pos_dx = np.flatnonzero(is_diag & (src < n))
        self.idx_dx = src[self.pos_dx]
        self.pos_dy = np.flatnonzero(is_diag & (src >= n))
        self.pos_a = np.flatnonzero(~is_diag)
        self.dtype = object if arith.dtype == object else float
        self.Ax = np.zeros(len(self.Ai), dtype=self.dtype) if self.dtype == float else arith.zeros(len(self.Ai))
        self.Ax[self.pos_a] = values[src[self.pos_a] - N]

        self.kernels = kernels_for(self.dtype, prefer_compiled=compiled)
        self.parent, self.lnz, self.Lp = self.kernels.symbolic(N, self.Ap, self.Ai)
        nnz = int(self.Lp[-1])
        self.Li = np.zeros(nnz, dtype=np.int64)
        self.Lx = np.zeros(nnz) if self.dtype == float else arith.zeros(nnz)
        self.D = np.zeros(N) if self.dtype == float else arith.zeros(N)
        self.expected_sign = np.where(perm < n, -1.0, 1.0)
        self.N = N

    @property
    def factor_nnz(self) -> int:
        return int(self.Lp[-1])

    def _factorize(self):
        dx = -(1 / self.theta + self.rho_p)
        self.Ax[self.pos_dx] = dx[self.idx_dx]
        self.Ax[self.pos_dy] = self.rho_d
        bad = self.kernels.numeric(self.N, self.Ap, self.Ai, self.Ax, self.Lp, self.parent,
                                   self.Li, self.Lx, self.D)
        if bad >= 0:
            raise NumericalBreakdown(f"zero pivot at position {bad}")
        Df = self.arith.to_float(self.D) if self.dtype == object else self.D
        if not np.all(np.isfinite(Df)):
            raise NumericalBreakdown("non-finite pivot")
        if np.any(Df * self.expected_sign <= 0):
            raise NumericalBreakdown("pivot of the wrong sign in quasi-definite factorization")

    def _solve(self, xi_d, xi_p):
        rhs = np.concatenate([xi_d, xi_p])
        b = rhs[self.perm]
        if self.dtype == float:
            b = np.ascontiguousarray(b, dtype=float)
        self.kernels.solve(self.N, self.Lp, self.Li, self.Lx, self.D, b)
        out = np.empty_like(b)
        out[self.perm] = b
        return out[: self.n], out[self.n:]
