"""Random small LPs with the structures presolve looks for, plus a HiGHS reference."""

import math

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from hsdlp.problem import GeneralLP


def reference(lp: GeneralLP):
    """Solve ``lp`` with HiGHS; returns the scipy result (objective includes c0 and sense)."""
    sign = 1.0 if lp.sense == "min" else -1.0
    A = lp.A.tocsr()
    rl, ru = lp.row_lower, lp.row_upper
    eq = np.isfinite(rl) & np.isfinite(ru) & (rl == ru)
    ub_rows, ub_rhs = [], []
    for i in np.flatnonzero(~eq):
        if np.isfinite(ru[i]):
            ub_rows.append(A[i])
            ub_rhs.append(ru[i])
        if np.isfinite(rl[i]):
            ub_rows.append(-A[i])
            ub_rhs.append(-rl[i])
    kw = {}
    if ub_rows:
        kw.update(A_ub=sp.vstack(ub_rows), b_ub=np.array(ub_rhs))
    if eq.any():
        kw.update(A_eq=A[np.flatnonzero(eq)], b_eq=rl[eq])
    bounds = [(None if not math.isfinite(l) else l, None if not math.isfinite(u) else u)
              for l, u in zip(lp.col_lower, lp.col_upper)]
    res = linprog(sign * lp.c, bounds=bounds, method="highs", **kw)
    res.objective = sign * res.fun + lp.c0 if res.status == 0 else None
    return res


def random_lp(rng, m=None, n=None, density=0.35, structured=True, sense=None):
    """A random LP that is feasible by construction (a known interior-ish point x0)."""
    m = m or int(rng.integers(2, 9))
    n = n or int(rng.integers(2, 11))
    A = sp.random(m, n, density=density, random_state=int(rng.integers(1 << 31)), format="lil",
                  data_rvs=lambda k: rng.choice([-1, 1], k) * rng.uniform(0.5, 3, k))
    A = A.toarray()
    lo = np.where(rng.random(n) < 0.7, rng.uniform(-2, 0, n), -np.inf)
    hi = np.where(rng.random(n) < 0.5, rng.uniform(1, 4, n), np.inf)
    if structured:
        k = rng.integers(n)
        hi[k] = lo[k] = rng.uniform(-1, 1) if rng.random() < 0.5 or not np.isfinite(lo[k]) else lo[k]
        if rng.random() < 0.5:
            # a row singleton
            i = rng.integers(m)
            A[i] = 0
            A[i, rng.integers(n)] = rng.uniform(0.5, 2)
        if rng.random() < 0.3 and m > 1:
            A[rng.integers(m)] = 0  # an empty row
    x0 = np.clip(rng.uniform(-1, 2, n), np.where(np.isfinite(lo), lo, -5), np.where(np.isfinite(hi), hi, 5))
    x0 = np.where(np.isfinite(lo) & np.isfinite(hi) & (lo == hi), lo, x0)
    act = A @ x0
    kinds = rng.choice(["eq", "le", "ge", "rng"], m)
    rl = np.where(kinds == "eq", act, np.where(kinds == "ge", act - rng.uniform(0, 1, m), -np.inf))
    ru = np.where(kinds == "eq", act, np.where(kinds == "le", act + rng.uniform(0, 1, m), np.inf))
    rngk = kinds == "rng"
    rl[rngk] = act[rngk] - rng.uniform(0, 1, rngk.sum())
    ru[rngk] = act[rngk] + rng.uniform(0, 1, rngk.sum())
    c = rng.uniform(-1, 1, n) * (rng.random(n) < 0.9)
    if sense is None:
        sense = "min" if rng.random() < 0.7 else "max"
    return GeneralLP(c=c, A=sp.csc_matrix(A), row_lower=rl, row_upper=ru, col_lower=lo,
                     col_upper=hi, c0=float(rng.uniform(-1, 1)), sense=sense)


def kkt_errors(lp: GeneralLP, x, y, s):
    """(stationarity, dual sign violation, duality gap) of a general-form primal-dual pair."""
    sign = 1.0 if lp.sense == "min" else -1.0
    x, y, s = (np.asarray(v, dtype=float) for v in (x, y, s))
    stat = np.abs(s - (lp.c - lp.A.T @ y)).max(initial=0.0)
    ym, sm = sign * y, sign * s

    def split(v, lo, hi):
        viol = 0.0
        val = 0.0
        for t, l, u in zip(v, lo, hi):
            if t > 0:
                if math.isfinite(l):
                    val += t * l
                else:
                    viol = max(viol, t)
            elif t < 0:
                if math.isfinite(u):
                    val += t * u
                else:
                    viol = max(viol, -t)
        return viol, val

    v1, d1 = split(ym, lp.row_lower, lp.row_upper)
    v2, d2 = split(sm, lp.col_lower, lp.col_upper)
    dual_obj = d1 + d2
    primal_obj = sign * float(lp.c @ x)
    gap = abs(primal_obj - dual_obj) / (1 + abs(primal_obj))
    return float(stat), max(v1, v2), gap
