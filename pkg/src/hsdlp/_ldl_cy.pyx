# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled float64 sparse LDL^T kernels; same contract as ``_ldl_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def symbolic(Py_ssize_t n, const cnp.int64_t[:] Ap, const cnp.int64_t[:] Ai):
    cdef cnp.int64_t[:] parent = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[:] lnz = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[:] flag = np.full(n, -1, dtype=np.int64)
    cdef Py_ssize_t k, p
    cdef cnp.int64_t i
    for k in range(n):
        flag[k] = k
        for p in range(Ap[k], Ap[k + 1]):
            i = Ai[p]
            if i < k:
                while flag[i] != k:
                    if parent[i] == -1:
                        parent[i] = k
                    lnz[i] += 1
                    flag[i] = k
                    i = parent[i]
    Lp = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.asarray(lnz), out=Lp[1:])
    return np.asarray(parent), np.asarray(lnz), Lp


def numeric(Py_ssize_t n, const cnp.int64_t[:] Ap, const cnp.int64_t[:] Ai,
            const double[:] Ax, const cnp.int64_t[:] Lp, const cnp.int64_t[:] parent,
            cnp.int64_t[:] Li, double[:] Lx, double[:] D):
    cdef double[:] Y = np.zeros(n)
    cdef cnp.int64_t[:] flag = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[:] pattern = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[:] lnz = np.zeros(n, dtype=np.int64)
    cdef Py_ssize_t k, p, top, length, p2
    cdef cnp.int64_t i
    cdef double yi, lki, dk
    for k in range(n):
        Y[k] = 0.0
        top = n
        flag[k] = k
        for p in range(Ap[k], Ap[k + 1]):
            i = Ai[p]
            if i <= k:
                Y[i] += Ax[p]
                length = 0
                while flag[i] != k:
                    pattern[length] = i
                    length += 1
                    flag[i] = k
                    i = parent[i]
                while length > 0:
                    top -= 1
                    length -= 1
                    pattern[top] = pattern[length]
        dk = Y[k]
        Y[k] = 0.0
        while top < n:
            i = pattern[top]
            top += 1
            yi = Y[i]
            Y[i] = 0.0
            p2 = Lp[i] + lnz[i]
            for p in range(Lp[i], p2):
                Y[Li[p]] -= Lx[p] * yi
            lki = yi / D[i]
            dk -= lki * yi
            Li[p2] = k
            Lx[p2] = lki
            lnz[i] += 1
        D[k] = dk
        if dk == 0.0:
            return k
    return -1


def solve(Py_ssize_t n, const cnp.int64_t[:] Lp, const cnp.int64_t[:] Li,
          const double[:] Lx, const double[:] D, double[:] x):
    cdef Py_ssize_t j, p
    cdef double xj, acc
    for j in range(n):
        xj = x[j]
        if xj != 0.0:
            for p in range(Lp[j], Lp[j + 1]):
                x[Li[p]] -= Lx[p] * xj
    for j in range(n):
        x[j] /= D[j]
    for j in range(n - 1, -1, -1):
        acc = x[j]
        for p in range(Lp[j], Lp[j + 1]):
            acc -= Lx[p] * x[Li[p]]
        x[j] = acc
