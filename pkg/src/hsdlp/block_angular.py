"""Unit block-angular matrices and their Schur-complement normal-equations solver.

The matrix has ``R`` convexity rows followed by ``m0`` linking rows::

    [ e^T                 ]
    [      e^T            ]
    [           ...       ]
    [                e^T  ]
    [ A_1  A_2  ...  A_R  A_0 ]

Columns are ordered block by block, then the ``n0`` linking-only columns.
After pivoting out the ``R`` scalar convexity pivots ``d_r`` the normal
equations reduce to a dense ``m0 x m0`` Schur complement ``C``, so a
factorization costs ``O(m0^2 N)`` and never forms the ``M x M`` normal matrix.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .arith import FLOAT64, Arithmetic
from .kkt.base import (KKTSolver, NumericalBreakdown, PreconditionError, UnsupportedMatrixKind,
                       register)
from .kkt.dense import ldl_dense_solve

# detection refuses structures whose dense linking part would exceed this many entries
MAX_DENSE_LINKING = 50_000_000


class UnitBlockAngularMatrix:
    """Dense storage of ``[e^T blocks; A_1 ... A_R A_0]``."""

    def __init__(self, blocks, A0=None, m0: int | None = None, dtype=float):
        if not len(blocks):
            raise ValueError("at least one block is required")
        blocks = [np.asarray(B, dtype=dtype) for B in blocks]
        if m0 is None:
            m0 = blocks[0].shape[0]
        for r, B in enumerate(blocks):
            if B.ndim != 2 or B.shape[0] != m0:
                raise ValueError(f"block {r} has shape {B.shape}, expected ({m0}, n_r)")
            if B.shape[1] == 0:
                raise ValueError(f"block {r} has no columns")
        A0 = np.zeros((m0, 0), dtype=dtype) if A0 is None else np.asarray(A0, dtype=dtype)
        if A0.ndim != 2 or A0.shape[0] != m0:
            raise ValueError(f"A0 has shape {A0.shape}, expected ({m0}, n0)")
        self.R = len(blocks)
        self.m0 = m0
        self.n0 = A0.shape[1]
        self.sizes = np.array([B.shape[1] for B in blocks], dtype=np.int64)
        self.offsets = np.concatenate([[0], np.cumsum(self.sizes)])
        self.nb = int(self.offsets[-1])
        self.AB = np.hstack(blocks) if m0 else np.zeros((0, self.nb), dtype=dtype)
        self.A0 = A0
        self.block_of = np.repeat(np.arange(self.R), self.sizes)
        self.dtype = self.AB.dtype

    @property
    def shape(self):
        return (self.R + self.m0, self.nb + self.n0)

    @property
    def nnz(self) -> int:
        return self.nb + int(np.count_nonzero(self.AB)) + int(np.count_nonzero(self.A0))

    def block(self, r: int) -> np.ndarray:
        return self.AB[:, self.offsets[r]:self.offsets[r + 1]]

    @property
    def blocks(self):
        return [self.block(r) for r in range(self.R)]

    def astype(self, dtype) -> "UnitBlockAngularMatrix":
        return UnitBlockAngularMatrix([B.astype(dtype) for B in self.blocks], self.A0.astype(dtype),
                                      self.m0, dtype)

    def matvec(self, v):
        v = np.asarray(v)
        vb, v0 = v[:self.nb], v[self.nb:]
        out = np.empty(self.shape[0], dtype=np.result_type(v.dtype, self.dtype))
        out[:self.R] = np.add.reduceat(vb, self.offsets[:-1])
        if self.m0:
            out[self.R:] = self.AB @ vb + (self.A0 @ v0 if self.n0 else 0)
        return out

    def rmatvec(self, y):
        y = np.asarray(y)
        yc, y0 = y[:self.R], y[self.R:]
        out = np.empty(self.shape[1], dtype=np.result_type(y.dtype, self.dtype))
        out[:self.nb] = yc[self.block_of]
        if self.m0:
            out[:self.nb] += self.AB.T @ y0
            out[self.nb:] = self.A0.T @ y0
        else:
            out[self.nb:] = 0
        return out

    def __matmul__(self, v):
        return self.matvec(v)

    @property
    def block_sum(self) -> sp.csr_matrix:
        """Indicator ``E`` (nb x R) so that ``W @ E`` sums the columns of ``W`` per block."""
        if getattr(self, "_block_sum", None) is None:
            self._block_sum = sp.csr_matrix((np.ones(self.nb), (np.arange(self.nb), self.block_of)),
                                            shape=(self.nb, self.R))
        return self._block_sum

    def to_sparse(self) -> sp.csc_matrix:
        conv = sp.csr_matrix((np.ones(self.nb), (self.block_of, np.arange(self.nb))),
                             shape=(self.R, self.shape[1]))
        link = sp.csr_matrix(np.hstack([self.AB, self.A0]).astype(float))
        return sp.vstack([conv, link]).tocsc()

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=self.dtype)
        out[self.block_of, np.arange(self.nb)] = 1
        out[self.R:, :self.nb] = self.AB
        out[self.R:, self.nb:] = self.A0
        return out

    def __repr__(self):
        return f"UnitBlockAngularMatrix(R={self.R}, m0={self.m0}, n0={self.n0}, N={self.shape[1]})"


@dataclass
class Detected:
    """A unit block-angular view of a general matrix: ``A[rows][:, cols]`` equals ``matrix``."""

    matrix: UnitBlockAngularMatrix
    rows: np.ndarray
    cols: np.ndarray


def detect(A) -> Detected | None:
    """Find unit convexity rows with disjoint supports; ``None`` if there are none.

    Rows whose nonzeros are all exactly one are taken greedily in order when
    their columns are not claimed yet.  Remaining rows are linking rows and
    unclaimed columns form ``A_0``.
    """
    if isinstance(A, UnitBlockAngularMatrix):
        return Detected(A, np.arange(A.shape[0]), np.arange(A.shape[1]))
    csr = sp.csr_matrix(A, dtype=float)
    m, n = csr.shape
    claimed = np.full(n, -1)
    conv = []
    for i in range(m):
        lo, hi = csr.indptr[i], csr.indptr[i + 1]
        cols = csr.indices[lo:hi]
        if hi == lo or np.any(csr.data[lo:hi] != 1) or np.any(claimed[cols] >= 0):
            continue
        claimed[cols] = len(conv)
        conv.append(i)
    if not conv:
        return None
    link = np.setdiff1d(np.arange(m), conv)
    block_cols = np.flatnonzero(claimed >= 0)
    block_cols = block_cols[np.argsort(claimed[block_cols], kind="stable")]
    free_cols = np.flatnonzero(claimed < 0)
    if len(link) * n > MAX_DENSE_LINKING:
        return None
    L = csr[link].toarray()
    sizes = np.bincount(claimed[block_cols], minlength=len(conv))
    offs = np.concatenate([[0], np.cumsum(sizes)])
    blocks = [L[:, block_cols[offs[r]:offs[r + 1]]] for r in range(len(conv))]
    mat = UnitBlockAngularMatrix(blocks, L[:, free_cols], m0=len(link))
    return Detected(mat, np.concatenate([conv, link]).astype(np.int64),
                    np.concatenate([block_cols, free_cols]).astype(np.int64))


# --- factorization ----------------------------------------------------------


@dataclass
class BlockAngularFactor:
    """``S = L D L^T`` with ``L = [[I, 0], [l^T, L_C]]`` and ``D = diag(d, D_C)``."""

    mat: UnitBlockAngularMatrix
    d: np.ndarray
    l: np.ndarray  # R x m0, row r is l_r
    C: np.ndarray  # Schur complement, then overwritten by L_C below the diagonal
    dC: np.ndarray
    W: np.ndarray  # scratch: A_B scaled by theta
    U: np.ndarray  # scratch: m0 x R block sums
    factored: bool = False
    n_factorizations: int = 0
    phi_diag: np.ndarray = field(default=None)

    @classmethod
    def allocate(cls, mat: UnitBlockAngularMatrix, dtype=None) -> "BlockAngularFactor":
        dt = dtype or mat.dtype
        R, m0 = mat.R, mat.m0
        return cls(mat=mat, d=np.zeros(R, dtype=dt), l=np.zeros((R, m0), dtype=dt),
                   C=np.zeros((m0, m0), dtype=dt), dC=np.zeros(m0, dtype=dt),
                   W=np.zeros(mat.AB.shape, dtype=dt), U=np.zeros((m0, R), dtype=dt),
                   phi_diag=np.zeros(m0, dtype=dt))

    @property
    def L_C(self) -> np.ndarray:
        L = np.tril(self.C, -1)
        L[np.diag_indices_from(L)] = 1
        return L

    def materialize(self):
        """Dense ``(L, D)`` with ``L D L^T = S`` (test helper)."""
        R, m0 = self.mat.R, self.mat.m0
        L = np.zeros((R + m0, R + m0), dtype=self.d.dtype)
        L[np.arange(R), np.arange(R)] = 1
        L[R:, :R] = self.l.T
        L[R:, R:] = self.L_C
        return L, np.concatenate([self.d, self.dC])


def _ldl_inplace(C, dC, ref_diag, eps):
    """Overwrite the lower triangle of ``C`` with ``L_C``; pivots go to ``dC``."""
    m = C.shape[0]
    for j in range(m):
        if j:
            w = C[j, :j] * dC[:j]
            dj = C[j, j] - np.dot(C[j, :j], w)
        else:
            dj = C[j, j]
        if not dj > 4 * eps * ref_diag[j]:
            raise NumericalBreakdown(f"Schur complement pivot {float(dj):.3e} at row {j}")
        dC[j] = dj
        if j + 1 < m:
            col = C[j + 1:, j]
            if j:
                col = col - C[j + 1:, :j] @ w
            C[j + 1:, j] = col / dj


def factorize(mat: UnitBlockAngularMatrix, theta, rho_p, rho_d, factor: BlockAngularFactor | None = None,
              eps: float = FLOAT64.eps) -> BlockAngularFactor:
    """Factor ``S = A (Theta^{-1} + rho_p I)^{-1} A^T + rho_d I`` through the Schur complement.

    Pass a previously allocated ``factor`` to reuse its storage.
    """
    if float(rho_d) < 0 or float(rho_p) < 0:
        raise PreconditionError("regularizations must be non-negative")
    f = factor if factor is not None else BlockAngularFactor.allocate(mat, np.asarray(theta).dtype)
    t = 1 / (1 / np.asarray(theta) + rho_p) if rho_p else np.asarray(theta)
    tb, t0 = t[:mat.nb], t[mat.nb:]
    starts = mat.offsets[:-1]
    f.d[:] = np.add.reduceat(tb, starts) + rho_d
    if not np.all(f.d > 0):
        raise NumericalBreakdown("non-positive convexity pivot")
    if mat.m0:
        np.multiply(mat.AB, tb, out=f.W)
        # reduceat along axis 1 is strided and scales poorly out of cache
        f.U[:] = f.W @ mat.block_sum if f.W.dtype != object else np.add.reduceat(f.W, starts, axis=1)
        f.l[:] = (f.U / f.d).T
        # Phi = sum_r A_r Theta_r A_r^T + A_0 Theta_0 A_0^T + rho_d I, then the R rank-1 downdates
        f.C[:] = f.W @ mat.AB.T
        if mat.n0:
            f.C += (mat.A0 * t0) @ mat.A0.T
        f.C[np.diag_indices_from(f.C)] += rho_d
        f.phi_diag[:] = np.diagonal(f.C)
        f.C -= f.U @ f.l
        _ldl_inplace(f.C, f.dC, np.abs(f.phi_diag), eps)
    f.factored = True
    f.n_factorizations += 1
    return f


def solve_normal(f: BlockAngularFactor, xi):
    """Solve ``S dy = xi`` where ``xi = (xi_1..xi_R, xi_0)``."""
    if not f.factored:
        raise PreconditionError("factorize must be called before solve_normal")
    R = f.mat.R
    xr, x0 = xi[:R], xi[R:]
    if f.mat.m0:
        # ldl_dense_solve reads only the strict lower triangle, i.e. L_C stored in C
        d0 = ldl_dense_solve(f.C, f.dC, x0 - f.l.T @ xr)
        dr = xr / f.d - f.l @ d0
    else:
        d0 = x0[:0]
        dr = xr / f.d
    return np.concatenate([dr, d0])


# --- KKT backend ------------------------------------------------------------


@register("block-angular")
class BlockAngularSolver(KKTSolver):
    """Augmented-system solves through the structured normal equations."""

    backend = "block-angular Schur complement"
    system = "normal equations"

    def __init__(self, A, arith: Arithmetic = FLOAT64):
        found = detect(A)
        if found is None:
            raise UnsupportedMatrixKind("matrix has no unit block-angular structure")
        super().__init__(A, arith)
        mat = found.matrix
        if arith.dtype == object and mat.dtype != object:
            mat = UnitBlockAngularMatrix([arith.asarray(B) for B in mat.blocks], arith.asarray(mat.A0),
                                         mat.m0, object)
        self.mat = mat
        ident = (np.array_equal(found.rows, np.arange(self.m))
                 and np.array_equal(found.cols, np.arange(self.n)))
        self.rows = None if ident else found.rows
        self.cols = None if ident else found.cols
        self.factor = BlockAngularFactor.allocate(mat, object if arith.dtype == object else float)
        self.Dinv = None

    def _factorize(self):
        theta = self.theta if self.cols is None else self.theta[self.cols]
        self.Dinv = 1 / (1 / theta + self.rho_p)
        factorize(self.mat, self.Dinv, 0, self.rho_d, self.factor, self.arith.eps)

    def _solve(self, xi_d, xi_p):
        if self.cols is not None:
            xi_d, xi_p = xi_d[self.cols], xi_p[self.rows]
        rhs = xi_p + self.mat.matvec(self.Dinv * xi_d)
        dy = solve_normal(self.factor, rhs)
        dx = self.Dinv * (self.mat.rmatvec(dy) - xi_d)
        if self.cols is not None:
            ox, oy = np.empty_like(dx), np.empty_like(dy)
            ox[self.cols], oy[self.rows] = dx, dy
            dx, dy = ox, oy
        return dx, dy


# --- text format --------------------------------------------------------------
#
#   UBA <R> <m0> <n0>
#   NR <n_1> ... <n_R>
#   BLOCK <r>          (m0 lines of n_r numbers, r = 1..R)
#   A0                 (m0 lines of n0 numbers)
#   COST               (optional, one line of N numbers)
#   RHS                (optional, one line of M numbers)
#   END
# Lines starting with '#' are comments.


def write_uba(mat: UnitBlockAngularMatrix, c=None, b=None) -> str:
    out = io.StringIO()
    num = lambda row: " ".join(repr(float(v)) for v in row)
    out.write(f"UBA {mat.R} {mat.m0} {mat.n0}\n")
    out.write("NR " + " ".join(str(int(k)) for k in mat.sizes) + "\n")
    for r in range(mat.R):
        out.write(f"BLOCK {r + 1}\n")
        for row in mat.block(r):
            out.write(num(row) + "\n")
    out.write("A0\n")
    if mat.n0:
        for row in mat.A0:
            out.write(num(row) + "\n")
    if c is not None:
        out.write("COST\n" + num(c) + "\n")
    if b is not None:
        out.write("RHS\n" + num(b) + "\n")
    out.write("END\n")
    return out.getvalue()


def read_uba(text: str):
    """Parse :func:`write_uba` output; returns ``(matrix, c or None, b or None)``."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(lines):
            raise ValueError("unexpected end of block-angular file")
        pos += 1
        return lines[pos - 1]

    def rows(k, width):
        out = np.zeros((k, width))
        for i in range(k):
            vals = take().split() if width else []
            if len(vals) != width:
                raise ValueError(f"expected {width} numbers on line {pos}")
            out[i] = [float(v) for v in vals]
        return out

    head = take().split()
    if len(head) != 4 or head[0] != "UBA":
        raise ValueError("missing 'UBA R m0 n0' header")
    R, m0, n0 = map(int, head[1:])
    nr = take().split()
    if nr[0] != "NR" or len(nr) != R + 1:
        raise ValueError("missing 'NR' line with one size per block")
    sizes = [int(v) for v in nr[1:]]
    blocks = []
    for r in range(R):
        if take() != f"BLOCK {r + 1}":
            raise ValueError(f"expected 'BLOCK {r + 1}' at line {pos}")
        blocks.append(rows(m0, sizes[r]))
    if take() != "A0":
        raise ValueError(f"expected 'A0' at line {pos}")
    A0 = rows(m0, n0) if n0 else np.zeros((m0, 0))
    mat = UnitBlockAngularMatrix(blocks, A0, m0)
    c = b = None
    while True:
        tag = take()
        if tag == "END":
            break
        if tag == "COST":
            c = rows(1, mat.shape[1])[0]
        elif tag == "RHS":
            b = rows(1, mat.shape[0])[0]
        else:
            raise ValueError(f"unknown section {tag!r}")
    return mat, c, b
