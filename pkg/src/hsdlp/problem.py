"""LP data model: user-facing general form, internal standard form, solutions.

General form::

    min/max  c^T x + c0
    s.t.     row_lower <= A x <= row_upper
             col_lower <=   x <= col_upper

Internal standard form (bounded variables kept apart from ``A``)::

    min  c^T x + c0    s.t.  A x = b,  x_I + w = u,  x, w >= 0

Infinite bounds are IEEE ``±inf`` (a true extended real, never a large
sentinel magnitude).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .arith import FLOAT64, Arithmetic
from . import linalg


class Status(enum.Enum):
    Optimal = "Optimal"
    PrimalInfeasible = "PrimalInfeasible"
    DualInfeasible = "DualInfeasible"
    IterationLimit = "IterationLimit"
    TimeLimit = "TimeLimit"
    NumericalFailure = "NumericalFailure"

    def __str__(self):
        return self.value


class InfeasibleBounds(ValueError):
    """A lower bound exceeds its upper bound."""


class MapMismatch(ValueError):
    """A solution does not match the dimensions of a variable map."""


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GeneralLP:
    c: np.ndarray
    A: sp.csc_matrix
    row_lower: np.ndarray
    row_upper: np.ndarray
    col_lower: np.ndarray
    col_upper: np.ndarray
    c0: float = 0.0
    sense: str = "min"
    row_names: tuple = ()
    col_names: tuple = ()
    name: str = ""

    def __post_init__(self):
        A = sp.csc_matrix(self.A, dtype=float)
        A.sum_duplicates()
        object.__setattr__(self, "A", A)
        for attr in ("c", "row_lower", "row_upper", "col_lower", "col_upper"):
            object.__setattr__(self, attr, _frozen(getattr(self, attr)))
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        m, n = A.shape
        if not self.row_names:
            object.__setattr__(self, "row_names", tuple(f"R{i + 1}" for i in range(m)))
        if not self.col_names:
            object.__setattr__(self, "col_names", tuple(f"C{j + 1}" for j in range(n)))
        object.__setattr__(self, "row_names", tuple(self.row_names))
        object.__setattr__(self, "col_names", tuple(self.col_names))

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @classmethod
    def from_arrays(cls, c, A, row_lower=None, row_upper=None, col_lower=None,
                    col_upper=None, **kw) -> "GeneralLP":
        A = sp.csc_matrix(np.atleast_2d(A) if not sp.issparse(A) else A, dtype=float)
        m, n = A.shape
        rl = np.full(m, -np.inf) if row_lower is None else row_lower
        ru = np.full(m, np.inf) if row_upper is None else row_upper
        cl = np.zeros(n) if col_lower is None else col_lower
        cu = np.full(n, np.inf) if col_upper is None else col_upper
        return cls(c=c, A=A, row_lower=rl, row_upper=ru, col_lower=cl, col_upper=cu, **kw)

    def objective(self, x) -> float:
        return float(self.c @ x + self.c0)

    def replace(self, **kw) -> "GeneralLP":
        fields = dict(c=self.c, A=self.A, row_lower=self.row_lower, row_upper=self.row_upper,
                      col_lower=self.col_lower, col_upper=self.col_upper, c0=self.c0,
                      sense=self.sense, row_names=self.row_names, col_names=self.col_names,
                      name=self.name)
        fields.update(kw)
        return GeneralLP(**fields)


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    index: int = -1

    def __str__(self):
        return f"{self.kind}: {self.message}"


def validate(lp: GeneralLP) -> list[Diagnostic]:
    """Return every invariant violation of ``lp`` (empty list when valid)."""
    out = []
    m, n = lp.A.shape
    for name, arr, size in (("c", lp.c, n), ("row_lower", lp.row_lower, m),
                            ("row_upper", lp.row_upper, m), ("col_lower", lp.col_lower, n),
                            ("col_upper", lp.col_upper, n)):
        if arr.shape != (size,):
            out.append(Diagnostic("dimension mismatch", f"{name} has shape {arr.shape}, expected ({size},)"))
    if out:
        return out
    if not np.all(np.isfinite(lp.A.data)):
        for k in np.flatnonzero(~np.isfinite(lp.A.data)):
            out.append(Diagnostic("non-finite coefficient", f"A entry #{k} is {lp.A.data[k]}", int(k)))
    for j in np.flatnonzero(~np.isfinite(lp.c)):
        out.append(Diagnostic("non-finite coefficient", f"objective coefficient of {lp.col_names[j]} is {lp.c[j]}", int(j)))
    if not np.isfinite(lp.c0):
        out.append(Diagnostic("non-finite coefficient", f"objective constant is {lp.c0}"))
    for kind, lo, hi, names in (("row", lp.row_lower, lp.row_upper, lp.row_names),
                                ("column", lp.col_lower, lp.col_upper, lp.col_names)):
        for k in np.flatnonzero(np.isnan(lo) | np.isnan(hi)):
            out.append(Diagnostic("non-finite coefficient", f"{kind} bound of {names[k]} is NaN", int(k)))
        for k in np.flatnonzero(lo > hi):
            out.append(Diagnostic("inverted bound", f"{kind} {names[k]}: lower {lo[k]} > upper {hi[k]}", int(k)))
        for k in np.flatnonzero((lo == np.inf) | (hi == -np.inf)):
            out.append(Diagnostic("inverted bound", f"{kind} {names[k]} has an empty domain", int(k)))
    return out


@dataclass(frozen=True)
class StandardLP:
    """``min c^T x + c0  s.t.  A x = b, x[bounded] <= upper, x >= 0``."""

    A: object
    b: np.ndarray
    c: np.ndarray
    bounded: np.ndarray
    upper: np.ndarray
    c0: object = 0.0
    arith: Arithmetic = FLOAT64

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def nbounded(self) -> int:
        return len(self.bounded)

    @classmethod
    def create(cls, A, b, c, bounded=(), upper=(), c0=0.0, arith: Arithmetic = FLOAT64):
        ar = arith
        b = ar.asarray(b)
        c = ar.asarray(c)
        bounded = np.asarray(bounded, dtype=np.int64)
        upper = ar.asarray(np.asarray(upper, dtype=float) if ar is FLOAT64 else upper)
        if ar.dtype == object and (sp.issparse(A) or isinstance(A, np.ndarray)):
            A = ar.asarray(linalg.dense(A))
        elif sp.issparse(A):
            A = sp.csc_matrix(A, dtype=float)
        if len(bounded) != len(upper):
            raise ValueError("bounded indices and upper bounds differ in length")
        if len(upper) and np.any(upper <= 0):
            raise ValueError("upper bounds of bounded variables must be positive")
        if A.shape != (len(b), len(c)):
            raise ValueError(f"A has shape {A.shape}, expected ({len(b)}, {len(c)})")
        return cls(A=A, b=b, c=c, bounded=bounded, upper=upper, c0=ar.scalar(c0), arith=ar)

    def to_arith(self, arith: Arithmetic) -> "StandardLP":
        A = self.A
        if arith.dtype == object and not hasattr(A, "matvec"):
            A = linalg.dense(A, float)
        return StandardLP.create(A, self.arith.to_float(self.b), self.arith.to_float(self.c),
                                 self.bounded, self.arith.to_float(self.upper),
                                 float(self.c0), arith)


# Column kinds in a VariableMap
SHIFT, NEGATE, SPLIT, FIXED = "shift", "negate", "split", "fixed"
# Row kinds
EQUALITY, UPPER, LOWER, RANGED, FREE = "equality", "upper", "lower", "ranged", "free"


@dataclass
class VariableMap:
    """How original rows/columns map onto standard-form rows/columns.

    ``col_kind[j]`` is one of shift/negate/split/fixed; ``col_index[j]`` the
    standard column (``col_index2[j]`` the negative part of a split);
    ``offset[j]`` the constant so that ``x = offset + sign * x_std``.
    ``row_index[i]`` is the standard row (-1 for dropped free rows) and
    ``slack_index[i]`` the slack column (-1 if none).
    """

    sense: str
    n_orig: int
    m_orig: int
    n_std: int
    m_std: int
    col_kind: list
    col_index: np.ndarray
    col_index2: np.ndarray
    offset: np.ndarray
    row_kind: list
    row_index: np.ndarray
    slack_index: np.ndarray
    slack_sign: np.ndarray
    bounded_pos: dict = field(default_factory=dict)
    lp: GeneralLP | None = None

    @property
    def flagged_fixed(self) -> list:
        return [j for j, k in enumerate(self.col_kind) if k == FIXED]


@dataclass
class Solution:
    status: Status
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    s: np.ndarray | None = None
    z: np.ndarray | None = None
    w: np.ndarray | None = None
    objective: float = float("nan")
    primal_ray: np.ndarray | None = None
    dual_ray: np.ndarray | None = None
    iterations: int = 0
    solve_time: float = 0.0
    log: list = field(default_factory=list)

    def __post_init__(self):
        if self.status is Status.Optimal and (self.x is None or self.y is None):
            raise ValueError("an optimal solution needs primal and dual values")
        if self.status is Status.PrimalInfeasible and self.dual_ray is None:
            raise ValueError("a primal infeasible solution needs a dual ray")
        if self.status is Status.DualInfeasible and self.primal_ray is None:
            raise ValueError("a dual infeasible solution needs a primal ray")


def to_standard_form(lp: GeneralLP, arith: Arithmetic = FLOAT64) -> tuple[StandardLP, VariableMap]:
    """Convert ``lp`` to internal standard form.

    Finite lower bounds are shifted to zero, upper-only variables negated,
    free variables split, fixed variables substituted out (and flagged), and
    every inequality/ranged row gets one slack column.
    """
    bad = [d for d in validate(lp) if d.kind == "inverted bound"]
    if bad:
        raise InfeasibleBounds("; ".join(str(d) for d in bad))
    m, n = lp.A.shape
    sign = 1.0 if lp.sense == "min" else -1.0
    lo, hi = lp.col_lower, lp.col_upper

    col_kind = []
    col_index = np.full(n, -1, dtype=np.int64)
    col_index2 = np.full(n, -1, dtype=np.int64)
    offset = np.zeros(n)
    t_rows, t_cols, t_vals = [], [], []
    bounded, upper = [], []
    k = 0
    for j in range(n):
        l, u = lo[j], hi[j]
        if np.isfinite(l) and np.isfinite(u) and u - l <= 0:
            col_kind.append(FIXED)
            offset[j] = l
            continue
        if np.isfinite(l):
            col_kind.append(SHIFT)
            offset[j] = l
            t_rows.append(j); t_cols.append(k); t_vals.append(1.0)
            if np.isfinite(u):
                bounded.append(k)
                upper.append(u - l)
            col_index[j] = k
            k += 1
        elif np.isfinite(u):
            col_kind.append(NEGATE)
            offset[j] = u
            t_rows.append(j); t_cols.append(k); t_vals.append(-1.0)
            col_index[j] = k
            k += 1
        else:
            col_kind.append(SPLIT)
            t_rows += [j, j]; t_cols += [k, k + 1]; t_vals += [1.0, -1.0]
            col_index[j] = k
            col_index2[j] = k + 1
            k += 2
    n_struct = k
    T = sp.csc_matrix((t_vals, (t_rows, t_cols)), shape=(n, n_struct))

    shift = lp.A @ offset
    row_kind = []
    row_index = np.full(m, -1, dtype=np.int64)
    slack_index = np.full(m, -1, dtype=np.int64)
    slack_sign = np.zeros(m)
    keep_rows, rhs = [], []
    s_rows, s_cols, s_vals = [], [], []
    for i in range(m):
        l, u = lp.row_lower[i], lp.row_upper[i]
        if not np.isfinite(l) and not np.isfinite(u):
            row_kind.append(FREE)
            continue
        r = len(keep_rows)
        row_index[i] = r
        keep_rows.append(i)
        if np.isfinite(l) and np.isfinite(u) and u - l <= 0:
            row_kind.append(EQUALITY)
            rhs.append(l - shift[i])
            continue
        if np.isfinite(u):
            row_kind.append(RANGED if np.isfinite(l) else UPPER)
            rhs.append(u - shift[i])
            s_rows.append(r); s_cols.append(k); s_vals.append(1.0)
            slack_sign[i] = 1.0
            if np.isfinite(l):
                bounded.append(k)
                upper.append(u - l)
        else:
            row_kind.append(LOWER)
            rhs.append(l - shift[i])
            s_rows.append(r); s_cols.append(k); s_vals.append(-1.0)
            slack_sign[i] = -1.0
        slack_index[i] = k
        k += 1
    m_std = len(keep_rows)
    A_struct = (lp.A[keep_rows, :] @ T).tocsc()
    A_slack = sp.csc_matrix((s_vals, (s_rows, [c - n_struct for c in s_cols])),
                            shape=(m_std, k - n_struct))
    A_std = sp.hstack([A_struct, A_slack], format="csc")
    A_std.eliminate_zeros()

    c_std = np.zeros(k)
    c_std[:n_struct] = sign * (T.T @ lp.c)
    c0 = sign * (lp.c0 + float(lp.c @ offset))
    order = np.argsort(bounded, kind="stable")
    bounded = np.asarray(bounded, dtype=np.int64)[order]
    upper = np.asarray(upper, dtype=float)[order]
    std = StandardLP.create(A_std, np.asarray(rhs, dtype=float), c_std, bounded, upper, c0, arith)
    vmap = VariableMap(sense=lp.sense, n_orig=n, m_orig=m, n_std=k, m_std=m_std,
                       col_kind=col_kind, col_index=col_index, col_index2=col_index2,
                       offset=offset, row_kind=row_kind, row_index=row_index,
                       slack_index=slack_index, slack_sign=slack_sign,
                       bounded_pos={int(b): p for p, b in enumerate(bounded)}, lp=lp)
    return std, vmap


def crush(x, vmap: VariableMap) -> np.ndarray:
    """Map an original-space point to standard form (including slacks)."""
    lp = vmap.lp
    x = np.asarray(x, dtype=float)
    xs = np.zeros(vmap.n_std)
    for j, kind in enumerate(vmap.col_kind):
        d = x[j] - vmap.offset[j]
        if kind == SHIFT:
            xs[vmap.col_index[j]] = d
        elif kind == NEGATE:
            xs[vmap.col_index[j]] = -d
        elif kind == SPLIT:
            xs[vmap.col_index[j]] = max(d, 0.0)
            xs[vmap.col_index2[j]] = max(-d, 0.0)
    act = lp.A @ x
    for i in range(vmap.m_orig):
        k = vmap.slack_index[i]
        if k < 0:
            continue
        if vmap.slack_sign[i] > 0:
            xs[k] = lp.row_upper[i] - act[i]
        else:
            xs[k] = act[i] - lp.row_lower[i]
    return xs


def _std_to_orig_primal(xs, vmap: VariableMap, with_offset: bool) -> np.ndarray:
    x = vmap.offset.copy() if with_offset else np.zeros(vmap.n_orig)
    for j, kind in enumerate(vmap.col_kind):
        if kind == SHIFT:
            x[j] += xs[vmap.col_index[j]]
        elif kind == NEGATE:
            x[j] -= xs[vmap.col_index[j]]
        elif kind == SPLIT:
            x[j] += xs[vmap.col_index[j]] - xs[vmap.col_index2[j]]
    return x


def uncrush(sol: Solution, vmap: VariableMap) -> Solution:
    """Map a standard-form solution back to the original variables and rows."""
    def _check(v, size, what):
        if v is not None and len(v) != size:
            raise MapMismatch(f"{what} has length {len(v)}, expected {size}")

    _check(sol.x, vmap.n_std, "x")
    _check(sol.s, vmap.n_std, "s")
    _check(sol.y, vmap.m_std, "y")
    _check(sol.primal_ray, vmap.n_std, "primal ray")
    _check(sol.dual_ray, vmap.m_std, "dual ray")
    lp = vmap.lp
    sign = 1.0 if vmap.sense == "min" else -1.0
    tofl = lambda v: None if v is None else np.asarray([float(t) for t in v], dtype=float)
    xs, ys, ss, zs = tofl(sol.x), tofl(sol.y), tofl(sol.s), tofl(sol.z)
    out = Solution.__new__(Solution)
    out.status = sol.status
    out.iterations = sol.iterations
    out.solve_time = sol.solve_time
    out.log = sol.log
    out.w = None
    out.z = None
    out.x = out.y = out.s = None
    out.primal_ray = out.dual_ray = None
    out.objective = float("nan")
    if xs is not None:
        out.x = _std_to_orig_primal(xs, vmap, True)
        out.objective = lp.objective(out.x)
    if ys is not None:
        y = np.zeros(vmap.m_orig)
        kept = vmap.row_index >= 0
        y[kept] = ys[vmap.row_index[kept]]
        out.y = sign * y
    if ss is not None:
        rc = ss.copy()
        if zs is not None:
            for k, p in vmap.bounded_pos.items():
                rc[k] -= zs[p]
        s = np.zeros(vmap.n_orig)
        aty = lp.A.T @ (sign * out.y if out.y is not None else np.zeros(vmap.m_orig))
        for j, kind in enumerate(vmap.col_kind):
            if kind == SHIFT:
                s[j] = rc[vmap.col_index[j]]
            elif kind == NEGATE:
                s[j] = -rc[vmap.col_index[j]]
            elif kind == SPLIT:
                s[j] = 0.5 * (rc[vmap.col_index[j]] - rc[vmap.col_index2[j]])
            else:
                s[j] = sign * lp.c[j] - aty[j]
        out.s = sign * s
    if sol.primal_ray is not None:
        out.primal_ray = _std_to_orig_primal(tofl(sol.primal_ray), vmap, False)
    if sol.dual_ray is not None:
        y = np.zeros(vmap.m_orig)
        kept = vmap.row_index >= 0
        y[kept] = tofl(sol.dual_ray)[vmap.row_index[kept]]
        out.dual_ray = y
    return out
