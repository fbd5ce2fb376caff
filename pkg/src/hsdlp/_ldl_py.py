"""Pure-Python sparse LDL^T kernels (up-looking, elimination-tree based).

These mirror ``_ldl_cy.pyx`` one-for-one.  They work for any scalar type that
supports ``+ - * /`` (numpy float64 or object arrays of mpfr), which is why
the extended-precision path always runs here.

All matrices are the upper triangle (diagonal included) of an already
permuted symmetric matrix in CSC form: ``Ap`` (n+1), ``Ai``, ``Ax``.
"""

import numpy as np


def symbolic(n, Ap, Ai):
    """Elimination tree and column counts of L.  Returns ``(parent, lnz, Lp)``."""
    Ap = Ap.tolist()
    Ai = Ai.tolist()
    parent = [-1] * n
    lnz = [0] * n
    flag = [-1] * n
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
    np.cumsum(lnz, out=Lp[1:])
    return np.asarray(parent, dtype=np.int64), np.asarray(lnz, dtype=np.int64), Lp


def numeric(n, Ap, Ai, Ax, Lp, parent, Li, Lx, D):
    """Numeric factorization into preallocated ``Li``, ``Lx``, ``D``.

    Returns -1 on success, else the index of the first zero pivot.
    """
    Ap_l = Ap.tolist()
    Ai_l = Ai.tolist()
    Ax_l = list(Ax)
    Lp_l = Lp.tolist()
    par = parent.tolist()
    zero = Ax_l[0] * 0 if Ax_l else 0.0
    Y = [zero] * n
    flag = [-1] * n
    pattern = [0] * n
    lnz = [0] * n
    Li_l = [0] * len(Li)
    Lx_l = [zero] * len(Lx)
    D_l = [zero] * n
    bad = -1
    for k in range(n):
        Y[k] = zero
        top = n
        flag[k] = k
        for p in range(Ap_l[k], Ap_l[k + 1]):
            i = Ai_l[p]
            if i <= k:
                Y[i] = Y[i] + Ax_l[p]
                length = 0
                while flag[i] != k:
                    pattern[length] = i
                    length += 1
                    flag[i] = k
                    i = par[i]
                while length > 0:
                    top -= 1
                    length -= 1
                    pattern[top] = pattern[length]
        dk = Y[k]
        Y[k] = zero
        while top < n:
            i = pattern[top]
            top += 1
            yi = Y[i]
            Y[i] = zero
            p2 = Lp_l[i] + lnz[i]
            for p in range(Lp_l[i], p2):
                r = Li_l[p]
                Y[r] = Y[r] - Lx_l[p] * yi
            lki = yi / D_l[i]
            dk = dk - lki * yi
            Li_l[p2] = k
            Lx_l[p2] = lki
            lnz[i] += 1
        D_l[k] = dk
        if dk == 0:
            bad = k
            break
    Li[:] = Li_l
    Lx[:] = Lx_l
    D[:] = D_l
    return bad


def solve(n, Lp, Li, Lx, D, x):
    """In-place ``x <- (L D L^T)^{-1} x``."""
    Lp_l = Lp.tolist()
    Li_l = Li.tolist()
    Lx_l = list(Lx)
    X = list(x)
    for j in range(n):
        xj = X[j]
        for p in range(Lp_l[j], Lp_l[j + 1]):
            r = Li_l[p]
            X[r] = X[r] - Lx_l[p] * xj
    for j in range(n):
        X[j] = X[j] / D[j]
    for j in range(n - 1, -1, -1):
        acc = X[j]
        for p in range(Lp_l[j], Lp_l[j + 1]):
            acc = acc - Lx_l[p] * X[Li_l[p]]
        X[j] = acc
    x[:] = X
