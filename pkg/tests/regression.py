"""Small regression LPs: textbook problems with known optima plus a few generated ones.

Each entry is ``(name, GeneralLP, known)`` where ``known`` is the published or
hand-derived optimal objective, or ``None`` when only the HiGHS reference applies.
"""

import math

import numpy as np
import scipy.sparse as sp

from hsdlp.mps_io import parse_mps
from hsdlp.problem import GeneralLP
from lpgen import random_lp

INF = math.inf

RANGED_MPS = """NAME          RANGED
OBJSENSE
    MAX
ROWS
 N  COST
 L  LIM1
 G  LIM2
 E  MYEQN
 L  R4
COLUMNS
    X1        COST         1.0   LIM1         1.0
    X1        LIM2         1.0
    X2        COST         2.0   LIM1         1.0
    X2        MYEQN       -1.0
    X3        COST        -1.0   MYEQN        1.0
    X3        R4           1.0
RHS
    RHS       COST        -3.5
    RHS       LIM1         4.0   LIM2         1.0
    RHS       MYEQN        7.0   R4           5.0
RANGES
    RNG       R4           2.0   MYEQN       -3.0
BOUNDS
 UP BND       X1           4.0
 LO BND       X2          -1.0
 UP BND       X2           1.0
 FR BND       X3
ENDATA
"""


def lp(A, c, rl, ru, cl=None, cu=None, sense="min", c0=0.0, name=""):
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    return GeneralLP(c=np.asarray(c, float), A=sp.csc_matrix(A), row_lower=np.asarray(rl, float),
                     row_upper=np.asarray(ru, float),
                     col_lower=np.zeros(n) if cl is None else np.asarray(cl, float),
                     col_upper=np.full(n, INF) if cu is None else np.asarray(cu, float),
                     c0=c0, sense=sense, name=name)


def le(k):
    return np.full(k, -INF)


def knapsack():
    v = np.array([60.0, 100, 120, 80, 30])
    w = np.array([10.0, 20, 30, 25, 5])
    cap = 50.0
    # fractional greedy by value density
    best, room = 0.0, cap
    for j in np.argsort(-v / w):
        take = min(1.0, room / w[j])
        best += take * v[j]
        room -= take * w[j]
    return lp([w], v, [-INF], [cap], np.zeros(5), np.ones(5), sense="max", name="knapsack"), best


def regression_set():
    out = [
        ("wyndor", lp([[1, 0], [0, 2], [3, 2]], [3, 5], le(3), [4, 12, 18], sense="max"), 36.0),
        ("giapetto", lp([[2, 1], [1, 1], [1, 0]], [3, 2], le(3), [100, 80, 40], sense="max"), 180.0),
        ("chvatal", lp([[2, 3, 1], [4, 1, 2], [3, 4, 2]], [5, 4, 3], le(3), [5, 11, 8], sense="max"), 13.0),
        ("klee-minty-3", lp([[1, 0, 0], [20, 1, 0], [200, 20, 1]], [100, 10, 1], le(3), [1, 100, 10000],
                            sense="max"), 10000.0),
        ("beale-cycling", lp([[0.25, -8, -1, 9], [0.5, -12, -0.5, 3], [0, 0, 1, 0]], [-0.75, 20, -0.5, 6],
                             le(3), [0, 0, 1]), -1.25),
        ("transportation", lp([[1, 1, 1, 0, 0, 0], [0, 0, 0, 1, 1, 1], [1, 0, 0, 1, 0, 0], [0, 1, 0, 0, 1, 0],
                               [0, 0, 1, 0, 0, 1]], [8, 6, 10, 9, 12, 13], [-INF, -INF, 20, 25, 25],
                              [30, 40, INF, INF, INF]), None),
        ("knapsack", *knapsack()),
        # duplicated row: rank-deficient equality system
        ("duplicate-rows", lp([[1, 1], [2, 2]], [1, -1], [1, 2], [1, 2]), -1.0),
        # upper-bounded-only, free and boxed variables, objective constant
        ("bounds-mix", lp([[1, 1, 1], [1, -1, 0]], [1, 1, -2], [-10, -INF], [INF, 3], [-INF, -2, -INF],
                          [-1, 3, 4], c0=2.5), None),
        ("ranged-mps", parse_mps(RANGED_MPS), None),
        ("free-split", lp([[1, -1], [1, 1]], [2, 1], [-2, 1], [INF, INF], [-INF, -INF], [INF, INF]), None),
    ]
    # min-cost flow on a 4-node network, supplies (+4, 0, 0, -4)
    arcs = [(0, 1, 2.0, 3), (0, 2, 4.0, 2), (1, 2, 1.0, 2), (1, 3, 5.0, 3), (2, 3, 1.0, 4)]
    N = np.zeros((4, len(arcs)))
    for j, (a, b, _, _) in enumerate(arcs):
        N[a, j], N[b, j] = 1, -1
    sup = [4, 0, 0, -4]
    out.append(("min-cost-flow", lp(N, [a[2] for a in arcs], sup, sup, np.zeros(5), [a[3] for a in arcs]),
                None))
    # assignment 4x4
    rng = np.random.default_rng(42)
    C = rng.integers(1, 20, (4, 4)).astype(float)
    rows = [np.kron(np.eye(4)[i], np.ones(4)) for i in range(4)] + [np.kron(np.ones(4), np.eye(4)[j])
                                                                    for j in range(4)]
    out.append(("assignment-4", lp(rows, C.ravel(), np.ones(8), np.ones(8)), None))
    for seed in (100, 103, 105, 108):
        out.append((f"random-{seed}", random_lp(np.random.default_rng(seed), m=8, n=14), None))
    return out
