"""Presolve reductions, postsolve stack and geometric row/column scaling.

The reduction loop applies, in order, until a full pass changes nothing:
bound check, empty rows, empty columns, row singletons, fixed variables, row
singletons, forcing/redundant rows, row singletons, free column singletons,
row singletons, dominated columns.  No rule ever adds a nonzero to ``A``.

Internally the problem is always a minimization; a ``max`` problem is negated
on entry, and duals are mapped back on exit with the same sign convention as
:func:`hsdlp.problem.uncrush`.

Dual reconstruction keeps ``s = c - A^T y`` up to date incrementally: a column
coming back gets ``s_j = c_j - sum a_ij y_i`` over the rows present at that
moment, and a row coming back with multiplier ``y_i`` subtracts ``a_ij y_i``
from the columns present.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .problem import GeneralLP, Solution, Status

FIXED_RTOL = 1e-12
FEAS_TOL = 1e-9
DUAL_TOL = 1e-9


class StackCorruption(RuntimeError):
    """Postsolve records are inconsistent with the reduced solution."""


class PresolveStatus(enum.Enum):
    InProgress = "InProgress"
    ReducedToEmpty = "ReducedToEmpty"
    Infeasible = "Infeasible"
    Unbounded = "Unbounded"


# --- postsolve records -------------------------------------------------------


@dataclass
class RemovedRow:
    """Row dropped with multiplier zero (empty or redundant)."""
    i: int
    reason: str


@dataclass
class FixedColumn:
    j: int
    value: float
    cost: float
    reason: str


@dataclass
class RowSingleton:
    i: int
    j: int
    a: float
    lower_from_row: bool
    upper_from_row: bool


@dataclass
class ForcingRow:
    i: int
    at_upper: bool
    cols: np.ndarray
    coefs: np.ndarray


@dataclass
class FreeColumnSingleton:
    i: int
    j: int
    a: float
    rhs: float
    cost: float
    cols: np.ndarray
    coefs: np.ndarray


@dataclass
class ScalingFactors:
    row: np.ndarray
    col: np.ndarray


@dataclass
class PresolveState:
    lp: GeneralLP
    sign: float
    c: np.ndarray
    c0: float
    row_lower: np.ndarray
    row_upper: np.ndarray
    col_lower: np.ndarray
    col_upper: np.ndarray
    row_active: np.ndarray
    col_active: np.ndarray
    row_nnz: np.ndarray
    col_nnz: np.ndarray
    csr: sp.csr_matrix
    csc: sp.csc_matrix
    stack: list = field(default_factory=list)
    status: PresolveStatus = PresolveStatus.InProgress
    message: str = ""
    primal_ray: np.ndarray | None = None
    dual_ray: np.ndarray | None = None
    certificate_verified: bool = False
    solution: Solution | None = None
    counts: dict = field(default_factory=dict)
    # provenance of tightened column bounds: (row, coefficient) or None
    lower_src: dict = field(default_factory=dict)
    upper_src: dict = field(default_factory=dict)

    @classmethod
    def create(cls, lp: GeneralLP) -> "PresolveState":
        sign = 1.0 if lp.sense == "min" else -1.0
        csc = lp.A.tocsc()
        csc.sort_indices()
        csr = csc.tocsr()
        csr.sort_indices()
        return cls(lp=lp, sign=sign, c=sign * np.array(lp.c, dtype=float), c0=sign * float(lp.c0),
                   row_lower=np.array(lp.row_lower, dtype=float), row_upper=np.array(lp.row_upper, dtype=float),
                   col_lower=np.array(lp.col_lower, dtype=float), col_upper=np.array(lp.col_upper, dtype=float),
                   row_active=np.ones(lp.m, dtype=bool), col_active=np.ones(lp.n, dtype=bool),
                   row_nnz=np.diff(csr.indptr).astype(np.int64), col_nnz=np.diff(csc.indptr).astype(np.int64),
                   csr=csr, csc=csc)

    # sparse access restricted to active entries
    def row(self, i):
        lo, hi = self.csr.indptr[i], self.csr.indptr[i + 1]
        cols = self.csr.indices[lo:hi]
        vals = self.csr.data[lo:hi]
        keep = self.col_active[cols]
        return cols[keep], vals[keep]

    def col(self, j):
        lo, hi = self.csc.indptr[j], self.csc.indptr[j + 1]
        rows = self.csc.indices[lo:hi]
        vals = self.csc.data[lo:hi]
        keep = self.row_active[rows]
        return rows[keep], vals[keep]

    @property
    def active(self) -> bool:
        return self.status is PresolveStatus.InProgress

    def bump(self, key, k=1):
        self.counts[key] = self.counts.get(key, 0) + k

    def drop_row(self, i):
        self.row_active[i] = False
        cols, _ = self.row(i)
        self.col_nnz[cols] -= 1

    def drop_col(self, j):
        self.col_active[j] = False
        rows, _ = self.col(j)
        self.row_nnz[rows] -= 1

    def fix_column(self, j, value, reason):
        """Substitute ``x_j = value`` into the row bounds and objective constant."""
        rows, vals = self.col(j)
        self.row_lower[rows] -= vals * value
        self.row_upper[rows] -= vals * value
        self.c0 += self.c[j] * value
        self.stack.append(FixedColumn(int(j), float(value), float(self.c[j]), reason))
        self.drop_col(j)

    def infeasible(self, msg, ray=None):
        self.status = PresolveStatus.Infeasible
        self.message = msg
        self.dual_ray = ray if ray is not None else np.zeros(self.lp.m)

    def unbounded(self, msg, ray):
        self.status = PresolveStatus.Unbounded
        self.message = msg
        self.primal_ray = ray


def _tol(v):
    return FEAS_TOL * max(1.0, abs(v)) if math.isfinite(v) else 0.0


def _is_fixed(lo, hi):
    return math.isfinite(lo) and math.isfinite(hi) and hi - lo <= FIXED_RTOL * max(1.0, abs(lo))


# --- row ray construction ----------------------------------------------------


def _row_ray(st: PresolveState, i, sigma):
    """Dual ray ``sigma e_i`` extended by the singleton rows that produced the bounds used."""
    y = np.zeros(st.lp.m)
    y[i] = sigma
    cols, vals = st.row(i)
    for j, a in zip(cols, vals):
        z = sigma * a
        # sigma=+1 proves sup < l using upper bounds where z > 0; sigma=-1 proves inf > u similarly
        src = st.upper_src.get(j) if z > 0 else st.lower_src.get(j)
        if src is not None:
            r, ar = src
            y[r] -= z / ar
    return y


# --- reductions --------------------------------------------------------------


def check_bounds(st: PresolveState) -> int:
    tol = np.vectorize(_tol, otypes=[float])
    if st.lp.n:
        bad = np.flatnonzero(st.col_active & (st.col_lower > st.col_upper + tol(st.col_upper)))
        if len(bad):
            st.infeasible(f"column {st.lp.col_names[bad[0]]} has lower bound above upper bound")
            return 0
    if st.lp.m:
        bad = np.flatnonzero(st.row_active & (st.row_lower > st.row_upper + tol(st.row_upper)))
        if len(bad):
            st.infeasible(f"row {st.lp.row_names[bad[0]]} has lower bound above upper bound")
    return 0


def reduce_empty_rows(st: PresolveState) -> int:
    count = 0
    for i in np.flatnonzero(st.row_active & (st.row_nnz == 0)):
        lo, hi = st.row_lower[i], st.row_upper[i]
        if lo > _tol(lo) or hi < -_tol(hi):
            ray = np.zeros(st.lp.m)
            ray[i] = 1.0 if lo > 0 else -1.0
            st.infeasible(f"empty row {st.lp.row_names[i]} requires 0 in [{lo}, {hi}]", ray)
            return count
        st.stack.append(RemovedRow(int(i), "empty"))
        st.drop_row(i)
        count += 1
    st.bump("empty rows", count)
    return count


def reduce_empty_columns(st: PresolveState) -> int:
    count = 0
    for j in np.flatnonzero(st.col_active & (st.col_nnz == 0)):
        c, lo, hi = st.c[j], st.col_lower[j], st.col_upper[j]
        if c > 0:
            v = lo
        elif c < 0:
            v = hi
        else:
            v = min(max(0.0, lo), hi)
        if not math.isfinite(v):
            ray = np.zeros(st.lp.n)
            ray[j] = -1.0 if c > 0 else 1.0
            st.unbounded(f"empty column {st.lp.col_names[j]} improves the objective without limit", ray)
            return count
        st.fix_column(j, v, "empty")
        count += 1
    st.bump("empty columns", count)
    return count


def reduce_row_singletons(st: PresolveState) -> int:
    count = 0
    for i in np.flatnonzero(st.row_active & (st.row_nnz == 1)):
        if not st.active:
            break
        if st.row_nnz[i] != 1 or not st.row_active[i]:
            continue
        cols, vals = st.row(i)
        j, a = int(cols[0]), float(vals[0])
        lo, hi = st.row_lower[i] / a, st.row_upper[i] / a
        if a < 0:
            lo, hi = hi, lo
        lj, uj = st.col_lower[j], st.col_upper[j]
        if lo > uj + _tol(uj):
            ray = np.zeros(st.lp.m)
            # a x_j >= l_i (a > 0) contradicts x_j <= u_j
            ray[i] = 1.0 if a > 0 else -1.0
            if st.upper_src.get(j):
                r, ar = st.upper_src[j]
                ray[r] -= ray[i] * a / ar
            st.infeasible(f"row {st.lp.row_names[i]} forces {st.lp.col_names[j]} above its upper bound", ray)
            break
        if hi < lj - _tol(lj):
            ray = np.zeros(st.lp.m)
            ray[i] = -1.0 if a > 0 else 1.0
            if st.lower_src.get(j):
                r, ar = st.lower_src[j]
                ray[r] -= ray[i] * a / ar
            st.infeasible(f"row {st.lp.row_names[i]} forces {st.lp.col_names[j]} below its lower bound", ray)
            break
        lower_from_row = lo > lj
        upper_from_row = hi < uj
        if lower_from_row:
            st.col_lower[j] = min(lo, uj)
            st.lower_src[j] = (int(i), a)
        if upper_from_row:
            st.col_upper[j] = max(hi, st.col_lower[j])
            st.upper_src[j] = (int(i), a)
        st.stack.append(RowSingleton(int(i), j, a, bool(lower_from_row), bool(upper_from_row)))
        st.drop_row(i)
        count += 1
    st.bump("row singletons", count)
    return count


def reduce_fixed_variables(st: PresolveState) -> int:
    count = 0
    for j in np.flatnonzero(st.col_active):
        lo, hi = st.col_lower[j], st.col_upper[j]
        if _is_fixed(lo, hi):
            st.fix_column(j, 0.5 * (lo + hi) if hi > lo else lo, "fixed")
            count += 1
    st.bump("fixed variables", count)
    return count


def _activity_bounds(st: PresolveState, cols, vals):
    lo = np.where(vals > 0, st.col_lower[cols], st.col_upper[cols]) * vals
    hi = np.where(vals > 0, st.col_upper[cols], st.col_lower[cols]) * vals
    with np.errstate(invalid="ignore"):
        return float(np.sum(lo)) if len(lo) else 0.0, float(np.sum(hi)) if len(hi) else 0.0


def reduce_forcing_dominated_rows(st: PresolveState) -> int:
    count = 0
    for i in np.flatnonzero(st.row_active & (st.row_nnz > 0)):
        if not st.active:
            break
        cols, vals = st.row(i)
        inf, sup = _activity_bounds(st, cols, vals)
        li, ui = st.row_lower[i], st.row_upper[i]
        if sup < li - _tol(li):
            st.infeasible(f"row {st.lp.row_names[i]} cannot reach its lower bound", _row_ray(st, i, 1.0))
            break
        if inf > ui + _tol(ui):
            st.infeasible(f"row {st.lp.row_names[i]} cannot get down to its upper bound", _row_ray(st, i, -1.0))
            break
        if inf >= li - _tol(li) and sup <= ui + _tol(ui):
            st.stack.append(RemovedRow(int(i), "redundant"))
            st.drop_row(i)
            count += 1
            st.bump("redundant rows")
            continue
        at_upper = math.isfinite(ui) and math.isfinite(inf) and inf >= ui - _tol(ui)
        at_lower = math.isfinite(li) and math.isfinite(sup) and sup <= li + _tol(li)
        if at_upper or at_lower:
            st.stack.append(ForcingRow(int(i), bool(at_upper), cols.copy(), vals.copy()))
            st.drop_row(i)
            for j, a in zip(cols, vals):
                low_side = (a > 0) == at_upper
                v = st.col_lower[j] if low_side else st.col_upper[j]
                st.fix_column(j, v, "forcing row")
            count += 1
            st.bump("forcing rows")
    return count


def reduce_free_column_singletons(st: PresolveState) -> int:
    count = 0
    for j in np.flatnonzero(st.col_active & (st.col_nnz == 1)):
        if not st.active:
            break
        if st.col_nnz[j] != 1 or not st.col_active[j]:
            continue
        rows, vals = st.col(j)
        i, a = int(rows[0]), float(vals[0])
        cols, coefs = st.row(i)
        others = cols != j
        ocols, ocoefs = cols[others], coefs[others]
        li, ui = st.row_lower[i], st.row_upper[i]
        lj, uj = st.col_lower[j], st.col_upper[j]
        if math.isfinite(lj) or math.isfinite(uj):
            # implied free: the row alone keeps x_j inside its bounds
            inf, sup = _activity_bounds(st, ocols, ocoefs)
            with np.errstate(invalid="ignore"):
                imp = sorted(((li - sup) / a, (ui - inf) / a))
            if not (imp[0] >= lj - _tol(lj) and imp[1] <= uj + _tol(uj)):
                continue
        y = st.c[j] / a
        if y > 0:
            rhs = li
        elif y < 0:
            rhs = ui
        else:
            rhs = li if math.isfinite(li) else ui
        if not math.isfinite(rhs):
            continue
        st.stack.append(FreeColumnSingleton(i, int(j), a, float(rhs), float(st.c[j]), ocols.copy(), ocoefs.copy()))
        if y != 0:
            st.c[ocols] -= y * ocoefs
            st.c0 += y * rhs
        st.row_active[i] = False
        st.col_nnz[cols] -= 1
        st.col_active[j] = False
        count += 1
    st.bump("free column singletons", count)
    return count


def reduce_dominated_columns(st: PresolveState) -> int:
    count = 0
    m = st.lp.m
    ylo = np.zeros(m)
    yhi = np.zeros(m)
    fin_l, fin_u = np.isfinite(st.row_lower), np.isfinite(st.row_upper)
    eq_or_ranged = fin_l & fin_u
    ylo[eq_or_ranged | fin_u] = -np.inf
    yhi[eq_or_ranged | fin_l] = np.inf
    for j in np.flatnonzero(st.col_active):
        rows, vals = st.col(j)
        if not len(rows):
            continue
        with np.errstate(invalid="ignore"):
            hi_dot = np.sum(np.where(vals > 0, vals * yhi[rows], vals * ylo[rows]))
            lo_dot = np.sum(np.where(vals > 0, vals * ylo[rows], vals * yhi[rows]))
        c = st.c[j]
        tol = DUAL_TOL * max(1.0, abs(c))
        if c - hi_dot > tol and math.isfinite(st.col_lower[j]):
            st.fix_column(j, st.col_lower[j], "dominated")
            count += 1
        elif c - lo_dot < -tol and math.isfinite(st.col_upper[j]):
            st.fix_column(j, st.col_upper[j], "dominated")
            count += 1
    st.bump("dominated columns", count)
    return count


PASSES = (check_bounds, reduce_empty_rows, reduce_empty_columns, reduce_row_singletons,
          reduce_fixed_variables, reduce_row_singletons, reduce_forcing_dominated_rows,
          reduce_row_singletons, reduce_free_column_singletons, reduce_row_singletons,
          reduce_dominated_columns)


def presolve(lp: GeneralLP, max_passes: int = 1000) -> tuple[GeneralLP | None, PresolveState]:
    """Reduce ``lp``.  Returns ``(reduced, state)``.

    When the reduction ends in a terminal state (``ReducedToEmpty``,
    ``Infeasible``, ``Unbounded``) ``reduced`` is ``None`` and
    ``state.solution`` holds the full-space result.
    """
    st = PresolveState.create(lp)
    for _ in range(max_passes):
        changed = 0
        for rule in PASSES:
            changed += rule(st)
            if not st.active:
                break
        if not st.active or changed == 0:
            break
    if st.status is PresolveStatus.Infeasible:
        st.certificate_verified = farkas_margin(lp, st.dual_ray) > 0
        st.solution = Solution(Status.PrimalInfeasible, dual_ray=st.dual_ray)
        return None, st
    if st.status is PresolveStatus.Unbounded:
        st.certificate_verified = primal_ray_valid(lp, st.primal_ray)
        st.solution = Solution(Status.DualInfeasible, primal_ray=st.primal_ray)
        return None, st
    if not st.row_active.any() and not st.col_active.any():
        st.status = PresolveStatus.ReducedToEmpty
        st.solution = postsolve(st, Solution(Status.Optimal, x=np.zeros(0), y=np.zeros(0), s=np.zeros(0)))
        return None, st
    return reduced_problem(st), st


def reduced_problem(st: PresolveState) -> GeneralLP:
    rows = np.flatnonzero(st.row_active)
    cols = np.flatnonzero(st.col_active)
    A = st.csc[rows][:, cols]
    lp = st.lp
    return GeneralLP(c=st.c[cols], A=A, row_lower=st.row_lower[rows], row_upper=st.row_upper[rows],
                     col_lower=st.col_lower[cols], col_upper=st.col_upper[cols], c0=st.c0, sense="min",
                     row_names=tuple(lp.row_names[i] for i in rows),
                     col_names=tuple(lp.col_names[j] for j in cols), name=lp.name)


# --- certificates ------------------------------------------------------------


def farkas_margin(lp: GeneralLP, y, tol=1e-7) -> float:
    """``min_{r in [l,u]} y^T r - max_{x in bounds} y^T A x`` (positive proves infeasibility).

    Entries of ``A^T y`` below ``tol`` (relative) count as zero.
    """
    if y is None or not np.any(y):
        lo, hi = lp.col_lower, lp.col_upper
        return 1.0 if np.any(lo > hi) or np.any(lp.row_lower > lp.row_upper) else -math.inf
    y = np.asarray(y, dtype=float)
    z = lp.A.T @ y
    scale = max(1.0, np.abs(y).max())
    z[np.abs(z) <= tol * scale * max(1.0, abs(lp.A).max() if lp.A.nnz else 1.0)] = 0.0
    with np.errstate(invalid="ignore"):
        rterm = np.where(y > 0, y * lp.row_lower, np.where(y < 0, y * lp.row_upper, 0.0)).sum()
        xterm = np.where(z > 0, z * lp.col_upper, np.where(z < 0, z * lp.col_lower, 0.0)).sum()
    val = rterm - xterm
    return float(val) if not math.isnan(val) else -math.inf


def primal_ray_valid(lp: GeneralLP, d, tol=1e-7) -> bool:
    """``d`` is a direction of unbounded improvement (ignoring primal feasibility)."""
    if d is None:
        return False
    d = np.asarray(d, dtype=float)
    sign = 1.0 if lp.sense == "min" else -1.0
    if not sign * (lp.c @ d) < -tol:
        return False
    Ad = lp.A @ d
    scale = tol * max(1.0, np.abs(d).max())
    ok = np.all(Ad[np.isfinite(lp.row_upper)] <= scale) and np.all(Ad[np.isfinite(lp.row_lower)] >= -scale)
    ok &= np.all(d[np.isfinite(lp.col_lower)] >= -scale) and np.all(d[np.isfinite(lp.col_upper)] <= scale)
    return bool(ok)


# --- postsolve ---------------------------------------------------------------


def postsolve(st: PresolveState, reduced: Solution) -> Solution:
    """Map a solution of the reduced (min-form, unscaled) problem to the original problem."""
    lp = st.lp
    m, n = lp.m, lp.n
    rows = np.flatnonzero(st.row_active)
    cols = np.flatnonzero(st.col_active)
    if reduced.status in (Status.PrimalInfeasible, Status.DualInfeasible):
        out = Solution.__new__(Solution)
        out.__dict__.update(reduced.__dict__)
        out.x = out.y = out.s = out.z = out.w = None
        out.objective = math.nan
        if reduced.dual_ray is not None:
            y = np.zeros(m)
            y[rows] = reduced.dual_ray
            out.dual_ray = y
        if reduced.primal_ray is not None:
            d = np.zeros(n)
            d[cols] = reduced.primal_ray
            # substituted columns move with the ray; every other removed column stays fixed
            for rec in reversed(st.stack):
                if isinstance(rec, FreeColumnSingleton):
                    d[rec.j] = -float(rec.coefs @ d[rec.cols]) / rec.a
            out.primal_ray = d
        return out
    if reduced.x is None:
        return reduced
    if len(reduced.x) != len(cols) or (reduced.y is not None and len(reduced.y) != len(rows)):
        raise StackCorruption("reduced solution does not match the reduced problem's dimensions")
    x = np.zeros(n)
    y = np.zeros(m)
    s = np.zeros(n)
    x[cols] = reduced.x
    if reduced.y is not None:
        y[rows] = reduced.y
    if reduced.s is not None:
        s[cols] = reduced.s
    else:
        s[cols] = st.c[cols] - st.csc[rows][:, cols].T @ y[rows]
    row_present = st.row_active.copy()
    col_present = st.col_active.copy()
    csr, csc = st.csr, st.csc

    def restore_row(i, yi, update_s=True):
        if row_present[i]:
            raise StackCorruption(f"row {i} restored twice")
        row_present[i] = True
        y[i] = yi
        if update_s and yi != 0:
            lo, hi = csr.indptr[i], csr.indptr[i + 1]
            cc, vv = csr.indices[lo:hi], csr.data[lo:hi]
            pres = col_present[cc]
            s[cc[pres]] -= vv[pres] * yi

    def restore_col(j, value, cost):
        if col_present[j]:
            raise StackCorruption(f"column {j} restored twice")
        col_present[j] = True
        x[j] = value
        lo, hi = csc.indptr[j], csc.indptr[j + 1]
        rr, vv = csc.indices[lo:hi], csc.data[lo:hi]
        pres = row_present[rr]
        s[j] = cost - vv[pres] @ y[rr[pres]]

    for rec in reversed(st.stack):
        if isinstance(rec, RemovedRow):
            restore_row(rec.i, 0.0)
        elif isinstance(rec, FixedColumn):
            restore_col(rec.j, rec.value, rec.cost)
        elif isinstance(rec, RowSingleton):
            if not col_present[rec.j]:
                raise StackCorruption(f"row singleton {rec.i} references absent column {rec.j}")
            sj = s[rec.j]
            yi = 0.0
            if (sj > 0 and rec.lower_from_row) or (sj < 0 and rec.upper_from_row):
                yi = sj / rec.a
            restore_row(rec.i, yi)
        elif isinstance(rec, ForcingRow):
            if not np.all(col_present[rec.cols]):
                raise StackCorruption(f"forcing row {rec.i} restored before its columns")
            ratios = s[rec.cols] / rec.coefs
            if rec.at_upper:
                yi = min(0.0, float(ratios.min()))
            else:
                yi = max(0.0, float(ratios.max()))
            restore_row(rec.i, yi)
        elif isinstance(rec, FreeColumnSingleton):
            if not np.all(col_present[rec.cols]):
                raise StackCorruption(f"free column singleton {rec.j} restored before its row's columns")
            v = (rec.rhs - float(rec.coefs @ x[rec.cols])) / rec.a
            if col_present[rec.j]:
                raise StackCorruption(f"column {rec.j} restored twice")
            col_present[rec.j] = True
            x[rec.j] = v
            # c of the row's other columns already carries -y_i a_ik
            restore_row(rec.i, rec.cost / rec.a, update_s=False)
            s[rec.j] = 0.0
        else:
            raise StackCorruption(f"unknown record {rec!r}")
    if not (row_present.all() and col_present.all()):
        raise StackCorruption("postsolve did not restore every row and column")
    sign = st.sign
    out = Solution.__new__(Solution)
    out.status = reduced.status
    out.x = x
    out.y = sign * y
    out.s = sign * s
    out.z = out.w = None
    out.objective = lp.objective(x)
    out.primal_ray = out.dual_ray = None
    out.iterations = reduced.iterations
    out.solve_time = reduced.solve_time
    out.log = reduced.log
    return out


# --- scaling -----------------------------------------------------------------


def scale(lp: GeneralLP) -> tuple[GeneralLP, ScalingFactors]:
    """Geometric scaling ``A~ = D_r A D_c`` with ``D = 1/sqrt(||.||_2)``, computed once."""
    A = lp.A.tocsc()
    sq = A.multiply(A)
    rn = np.sqrt(np.asarray(sq.sum(axis=1)).ravel())
    cn = np.sqrt(np.asarray(sq.sum(axis=0)).ravel())
    dr = np.ones(lp.m)
    dc = np.ones(lp.n)
    dr[rn > 0] = 1 / np.sqrt(rn[rn > 0])
    dc[cn > 0] = 1 / np.sqrt(cn[cn > 0])
    As = sp.diags(dr) @ A @ sp.diags(dc)
    scaled = lp.replace(A=sp.csc_matrix(As), c=lp.c * dc, row_lower=lp.row_lower * dr,
                        row_upper=lp.row_upper * dr, col_lower=lp.col_lower / dc,
                        col_upper=lp.col_upper / dc)
    return scaled, ScalingFactors(dr, dc)


def unscale(sol: Solution, f: ScalingFactors) -> Solution:
    out = Solution.__new__(Solution)
    out.__dict__.update(sol.__dict__)
    if sol.x is not None:
        out.x = np.asarray(sol.x, dtype=float) * f.col
    if sol.y is not None:
        out.y = np.asarray(sol.y, dtype=float) * f.row
    if sol.s is not None:
        out.s = np.asarray(sol.s, dtype=float) / f.col
    if sol.primal_ray is not None:
        out.primal_ray = np.asarray(sol.primal_ray, dtype=float) * f.col
    if sol.dual_ray is not None:
        out.dual_ray = np.asarray(sol.dual_ray, dtype=float) * f.row
    return out
