"""Matrix-kind dispatch for the constraint matrix.

The IPM never inspects the concrete type of ``A``; it only needs products with
``A`` and ``A^T``.  Supported kinds: scipy sparse (float64), dense numpy arrays
(any dtype, including object arrays of mpfr), and any object exposing
``matvec``/``rmatvec`` (e.g. :class:`hsdlp.block_angular.UnitBlockAngularMatrix`).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def matvec(A, x):
    if hasattr(A, "matvec") and not isinstance(A, np.ndarray) and not sp.issparse(A):
        return A.matvec(x)
    if sp.issparse(A) and x.dtype == object:
        return _object_sparse_matvec(A.tocsr(), x)
    return A @ x


def rmatvec(A, y):
    if hasattr(A, "rmatvec") and not isinstance(A, np.ndarray) and not sp.issparse(A):
        return A.rmatvec(y)
    if sp.issparse(A) and y.dtype == object:
        return _object_sparse_matvec(A.T.tocsr(), y)
    return A.T @ y


def _object_sparse_matvec(csr, x):
    out = np.empty(csr.shape[0], dtype=object)
    zero = x[0] * 0 if len(x) else 0
    for i in range(csr.shape[0]):
        acc = zero
        for p in range(csr.indptr[i], csr.indptr[i + 1]):
            acc = acc + float(csr.data[p]) * x[csr.indices[p]]
        out[i] = acc
    return out


def shape(A):
    return A.shape


def to_sparse(A) -> sp.csc_matrix:
    """Float64 CSC copy of ``A`` (pattern source for sparse factorizations)."""
    if sp.issparse(A):
        return A.tocsc().astype(float)
    if hasattr(A, "to_sparse"):
        return A.to_sparse()
    return sp.csc_matrix(np.asarray(A, dtype=float))


def dense(A, dtype=None):
    if sp.issparse(A):
        out = A.toarray()
    elif hasattr(A, "to_dense"):
        out = A.to_dense()
    else:
        out = np.asarray(A)
    return out if dtype is None else out.astype(dtype)


def column_sqnorms(A):
    if sp.issparse(A):
        return np.asarray(A.multiply(A).sum(axis=0)).ravel()
    D = dense(A, float)
    return (D * D).sum(axis=0)
