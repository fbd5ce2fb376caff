"""Dantzig-Wolfe column generation over unit block-angular master problems.

The compact problem is::

    min  sum_r c_r^T x_r + c_0^T x_0
    s.t. sum_r A_r x_r + A_0 x_0 = b_0,   x_r in X_r,   x_0 >= 0

and the master replaces each ``x_r`` by a convex combination of extreme points
of ``X_r`` plus a conic combination of its extreme rays.  Point columns sit in
their block (one convexity row each); ray columns, ``x_0`` and the penalized
slack/surplus artificials are linking-only columns, so every restricted master
is a :class:`~hsdlp.block_angular.UnitBlockAngularMatrix`.
"""

from __future__ import annotations

import enum
import hashlib
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import ipm
from .block_angular import UnitBlockAngularMatrix
from .problem import StandardLP, Status

POINT, RAY, ARTIFICIAL, SLACK, LINKING = "point", "ray", "artificial", "slack", "linking"


class CGStatus(enum.Enum):
    Optimal = "Optimal"
    MasterInfeasible = "MasterInfeasible"  # pricing is done but artificials stay positive
    PrimalInfeasible = "PrimalInfeasible"  # a pricing subproblem has no feasible point
    Unbounded = "Unbounded"
    IterationLimit = "IterationLimit"
    NumericalFailure = "NumericalFailure"

    def __str__(self):
        return self.value


@dataclass
class Column:
    block: int  # -1 for linking-only columns
    cost: float
    coefs: np.ndarray
    kind: str = POINT
    x: np.ndarray | None = None  # subproblem point or ray behind the column
    reduced_cost: float | None = None  # at the time it was appended
    origin: int = -1  # pricing block that produced the column

    @property
    def convex(self) -> bool:
        return self.kind in (POINT, ARTIFICIAL)


@dataclass
class PricingResult:
    kind: str  # "point", "ray" or "infeasible"
    x: np.ndarray | None = None
    cost: float = 0.0
    coefs: np.ndarray | None = None
    value: float = math.inf


class PricingInfeasible(Exception):
    pass


# an oracle maps (pi, sigma_r) to a PricingResult
PricingOracle = Callable[[np.ndarray, float], PricingResult]


@dataclass
class EnumerationOracle:
    """Exact oracle for a polytope given by its extreme points (columns of ``points``)."""

    c: np.ndarray
    A: np.ndarray
    points: np.ndarray
    rays: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.A = np.asarray(self.A, dtype=float).reshape(-1, len(self.c))
        self.points = np.asarray(self.points, dtype=float).reshape(len(self.c), -1)
        if self.rays is not None:
            self.rays = np.asarray(self.rays, dtype=float).reshape(len(self.c), -1)

    def __call__(self, pi, sigma) -> PricingResult:
        if not self.points.shape[1]:
            return PricingResult("infeasible")
        red = self.c - self.A.T @ pi
        if self.rays is not None and self.rays.shape[1]:
            rv = red @ self.rays
            k = int(np.argmin(rv))
            if rv[k] < 0:
                d = self.rays[:, k]
                return PricingResult(RAY, d, float(self.c @ d), self.A @ d, float(rv[k]))
        vals = red @ self.points - sigma
        k = int(np.argmin(vals))
        p = self.points[:, k]
        return PricingResult(POINT, p, float(self.c @ p), self.A @ p, float(vals[k]))


def box_vertices(upper) -> np.ndarray:
    """All vertices of ``[0, upper]`` as columns (small dimensions only)."""
    upper = np.asarray(upper, dtype=float)
    n = len(upper)
    bits = (np.arange(2 ** n)[None, :] >> np.arange(n)[:, None]) & 1
    return bits * upper[:, None]


@dataclass
class MasterProblem:
    R: int
    m0: int
    b0: np.ndarray
    penalty: float
    columns: list = field(default_factory=list)

    def block_columns(self, r: int):
        return [c for c in self.columns if c.block == r]

    def linking_columns(self):
        return [c for c in self.columns if c.block < 0]

    def ordered(self):
        """Columns in master-matrix order: block by block, then linking-only."""
        out = []
        for r in range(self.R):
            out += self.block_columns(r)
        return out + self.linking_columns()

    def add(self, col: Column):
        if not len(col.coefs) == self.m0:
            raise ValueError(f"column has {len(col.coefs)} linking coefficients, expected {self.m0}")
        if col.convex != (col.block >= 0):
            raise ValueError("convexity columns need a block, linking-only columns must not have one")
        self.columns.append(col)

    def add_linking_block(self, A0, c0):
        """Linking-only variables ``x_0 >= 0`` of the compact problem."""
        A0 = np.asarray(A0, dtype=float).reshape(self.m0, -1)
        for j in range(A0.shape[1]):
            self.add(Column(-1, float(c0[j]), A0[:, j].copy(), LINKING))

    def build(self):
        """``(matrix, c, b, order)`` of the current restricted master."""
        order = self.ordered()
        blocks = [np.column_stack([c.coefs for c in self.block_columns(r)]) if self.m0
                  else np.zeros((0, len(self.block_columns(r)))) for r in range(self.R)]
        link = self.linking_columns()
        A0 = np.column_stack([c.coefs for c in link]) if link else np.zeros((self.m0, 0))
        mat = UnitBlockAngularMatrix(blocks, A0.reshape(self.m0, len(link)), self.m0)
        c = np.array([col.cost for col in order])
        b = np.concatenate([np.ones(self.R), self.b0])
        return mat, c, b, order


def initialize_rmp(R: int, m0: int, b0=None, penalty: float | None = None) -> MasterProblem:
    """Master with only penalized artificials; feasible for any ``b0``."""
    b0 = np.zeros(m0) if b0 is None else np.asarray(b0, dtype=float)
    if len(b0) != m0:
        raise ValueError("b0 must have m0 entries")
    if penalty is None:
        penalty = 1e4 * max(1.0, float(np.abs(b0).max()) if m0 else 1.0)
    if not penalty > 0:
        raise ValueError("penalty must be positive")
    mp = MasterProblem(R, m0, b0, float(penalty))
    for r in range(R):
        mp.add(Column(r, mp.penalty, np.zeros(m0), ARTIFICIAL))
    for i in range(m0):
        e = np.zeros(m0)
        e[i] = 1.0
        mp.add(Column(-1, mp.penalty, e, SLACK))
        mp.add(Column(-1, mp.penalty, -e, SLACK))
    return mp


def reduced_cost(col: Column, pi, sigma_r: float = 0.0) -> float:
    rc = col.cost - float(np.dot(pi, col.coefs))
    return rc - sigma_r if col.convex else rc


def price(mp: MasterProblem, pi, sigma, oracles: Sequence[PricingOracle], max_new_columns: int,
          rng: np.random.Generator, eps_price: float) -> list:
    """Partial pricing in random block order; returns the columns to append."""
    new = []
    for r in rng.permutation(mp.R):
        res = oracles[r](pi, float(sigma[r]))
        if res.kind == "infeasible":
            raise PricingInfeasible(f"pricing subproblem {r} is infeasible")
        col = Column(r if res.kind == POINT else -1, float(res.cost), np.asarray(res.coefs, dtype=float),
                     res.kind, None if res.x is None else np.asarray(res.x, dtype=float), origin=int(r))
        rc = reduced_cost(col, pi, sigma[r])
        if abs(rc - res.value) > 1e-9 * (1 + abs(rc)):
            raise ValueError(f"oracle {r} reported {res.value} but the column prices at {rc}")
        if rc < -eps_price:
            col.reduced_cost = rc
            new.append(col)
            if len(new) >= max_new_columns:
                break
    return new


@dataclass
class ColgenResult:
    status: CGStatus
    objective: float
    lam: np.ndarray
    columns: list
    log: list
    master: MasterProblem

    def block_solution(self, r: int) -> np.ndarray:
        """``x_r`` recovered from the point and ray weights of block ``r``."""
        x = None
        for col, v in zip(self.columns, self.lam):
            if col.x is not None and col.origin == r:
                x = v * col.x if x is None else x + v * col.x
        return x

    def format_log(self, sep: str = "\t") -> str:
        keys = ("iter", "objective", "master_time", "pricing_time", "columns", "min_rc", "ipm_iters")
        lines = [sep.join(keys)]
        for row in self.log:
            lines.append(sep.join(f"{row[k]:.10g}" if isinstance(row[k], float) else str(row[k]) for k in keys))
        return "\n".join(lines) + "\n"


def run_colgen(mp: MasterProblem, oracles: Sequence[PricingOracle], params: ipm.Parameters | None = None,
               max_iter: int = 200, max_new_columns: int | None = None, seed: int = 0,
               eps_price: float | None = None, kkt: str = "block-angular", log=None) -> ColgenResult:
    """Alternate restricted-master solves and pricing until no column prices out."""
    if len(oracles) != mp.R:
        raise ValueError("one pricing oracle per block is required")
    budget = max_new_columns or max(1, mp.R // 10)
    rng = np.random.default_rng(seed)
    rows = []
    status, obj, lam, order = CGStatus.IterationLimit, math.nan, np.zeros(0), []
    for k in range(max_iter):
        mat, c, b, order = mp.build()
        t0 = time.perf_counter()
        sol = ipm.solve(StandardLP.create(mat, b, c), params, kkt=kkt)
        t_master = time.perf_counter() - t0
        if sol.status is not Status.Optimal:
            status = CGStatus.Unbounded if sol.status is Status.DualInfeasible else CGStatus.NumericalFailure
            break
        lam, obj = sol.x, float(sol.objective)
        sigma, pi = sol.y[:mp.R], sol.y[mp.R:]
        real = [col.cost for col in order if col.kind not in (ARTIFICIAL, SLACK)]
        eps = eps_price if eps_price is not None else 1e-6 * (1 + max(map(abs, real), default=0.0))
        t1 = time.perf_counter()
        try:
            new = price(mp, pi, sigma, oracles, budget, rng, eps)
        except PricingInfeasible:
            status = CGStatus.PrimalInfeasible
            break
        t_price = time.perf_counter() - t1
        for col in new:
            mp.add(col)
        row = dict(iter=k + 1, objective=obj, master_time=t_master, pricing_time=t_price, columns=len(new),
                   min_rc=min((col.reduced_cost for col in new), default=0.0), ipm_iters=sol.iterations)
        rows.append(row)
        if log is not None:
            log(row)
        if not new:
            art = sum(v for col, v in zip(order, lam) if col.kind in (ARTIFICIAL, SLACK))
            status = CGStatus.Optimal if art <= 1e-6 * (1 + np.abs(b).max()) else CGStatus.MasterInfeasible
            break
    return ColgenResult(status, obj, lam, order, rows, mp)


# --- synthetic instances ------------------------------------------------------


def generate_synthetic_master(R: int, m0: int, density: float, seed: int = 0, n_r: int = 8,
                              penalty: float = 1e3):
    """Random dense master ``(matrix, c, b)``; feasible by construction.

    Linking coefficients are uniform on [0, 1] with the given nonzero density;
    each linking row also has a penalized slack/surplus pair in ``A_0``.
    """
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    if R < 1 or m0 < 0 or n_r < 1:
        raise ValueError("need R >= 1, m0 >= 0 and n_r >= 1")
    rng = np.random.default_rng(seed)
    AB = rng.uniform(0, 1, (m0, R * n_r)) * (rng.random((m0, R * n_r)) < density)
    blocks = np.split(AB, R, axis=1)
    A0 = np.hstack([np.eye(m0), -np.eye(m0)])
    mat = UnitBlockAngularMatrix(blocks, A0, m0)
    lam = rng.dirichlet(np.ones(n_r), size=R).ravel()
    b = np.concatenate([np.ones(R), AB @ lam])
    c = np.concatenate([rng.uniform(0, 1, R * n_r), np.full(2 * m0, penalty)])
    return mat, c, b


def instance_hash(mat: UnitBlockAngularMatrix, c, b) -> str:
    h = hashlib.sha256()
    for arr in (mat.AB, mat.A0, mat.sizes, np.asarray(c), np.asarray(b)):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()
