"""Regularized homogeneous self-dual interior-point method.

Works on a :class:`~hsdlp.problem.StandardLP`
``min c^T x  s.t.  A x = b,  x_I + w = u,  x, w >= 0`` and embeds it into the
homogeneous model with variables ``(x, w, y, s, z, tau, kappa)``.  Bounded
pairs ``(x_I, s_I)`` and ``(w, z)`` enter every complementarity formula the same
way, so ``mu = (x^T s + w^T z + tau kappa) / (n + |I| + 1)``.

Log format
----------
One header block, then one fixed-width line per iteration with columns
``iter pobj dobj pfeas dfeas gap mu alpha rho_p rho_d time``; ``pfeas`` is the
larger of the scaled ``r_p`` and ``r_u`` norms.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .arith import FLOAT64, Arithmetic, norm_inf
from .kkt import (Direction, NewtonContext, NewtonRHS, NumericalBreakdown, newton_solve)
from .kkt import setup as kkt_setup
from .problem import Solution, Status, StandardLP

LOG_COLUMNS = ("iter", "pobj", "dobj", "pfeas", "dfeas", "gap", "mu", "alpha", "rho_p", "rho_d", "time")
LOG_HEADER = ("{:>4} {:>15} {:>15} {:>9} {:>9} {:>9} {:>9} {:>7} {:>8} {:>8} {:>8}"
              .format(*LOG_COLUMNS))


@dataclass
class Parameters:
    """Solver options.  Tolerances left as ``None`` default to sqrt(machine eps)."""

    eps_p: float | None = None
    eps_d: float | None = None
    eps_g: float | None = None
    eps_i: float | None = None
    gamma_min: float = 0.1
    beta: float = 0.1
    max_corrections: int = 5
    max_iter: int = 100
    step_damping: float = 0.9995
    correction_factor: float = 1.10
    reg_init: float = 1.0
    reg_floor: float | None = None
    reg_divisor: float = 10.0
    reg_rescue: float = 100.0
    rescue_limit: int = 3
    time_limit: float = math.inf
    verbose: bool = False

    def __post_init__(self):
        for name in ("eps_p", "eps_d", "eps_g", "eps_i"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")
        if self.gamma_min <= 0:
            raise ValueError("gamma_min must be positive")
        if self.max_iter < 0 or self.max_corrections < 0:
            raise ValueError("iteration limits must be non-negative")

    def resolved(self, arith: Arithmetic) -> "Parameters":
        """Copy with ``None`` tolerances and floor replaced by sqrt(eps) of ``arith``."""
        se = math.sqrt(arith.eps)
        kw = dict(self.__dict__)
        for name in ("eps_p", "eps_d", "eps_g", "eps_i", "reg_floor"):
            if kw[name] is None:
                kw[name] = se
        return Parameters(**kw)


@dataclass
class Regularizations:
    rho_p: object
    rho_d: object
    rho_g: object
    rescues: int = 0


@dataclass
class Iterate:
    x: np.ndarray
    w: np.ndarray
    y: np.ndarray
    s: np.ndarray
    z: np.ndarray
    tau: object
    kappa: object
    rp: np.ndarray | None = None
    ru: np.ndarray | None = None
    rd: np.ndarray | None = None
    rg: object = None
    mu: object = None
    iteration: int = 0
    start: float = field(default_factory=time.perf_counter)

    @property
    def ncomp(self) -> int:
        return len(self.x) + len(self.w) + 1


def initialize(std: StandardLP) -> Iterate:
    ar = std.arith
    n, m, k = std.n, std.m, std.nbounded
    it = Iterate(x=ar.ones(n), w=ar.ones(k), y=ar.zeros(m), s=ar.ones(n), z=ar.ones(k),
                 tau=ar.scalar(1), kappa=ar.scalar(1))
    compute_residuals(it, std)
    return it


def _dot(a, b):
    return np.dot(a, b) if len(a) else 0


def compute_residuals(it: Iterate, std: StandardLP) -> Iterate:
    I = std.bounded
    tau = it.tau
    it.rp = std.b * tau - linalg.matvec(std.A, it.x)
    it.ru = std.upper * tau - it.x[I] - it.w
    rd = std.c * tau - linalg.rmatvec(std.A, it.y) - it.s
    if len(I):
        rd[I] += it.z
    it.rd = rd
    it.rg = _dot(std.c, it.x) - _dot(std.b, it.y) + _dot(std.upper, it.z) + it.kappa
    it.mu = (_dot(it.x, it.s) + _dot(it.w, it.z) + tau * it.kappa) / it.ncomp
    return it


@dataclass
class Measures:
    pres: float
    ures: float
    dres: float
    gap: float
    pobj: float
    dobj: float
    ctx: float
    bty: float


def measures(it: Iterate, std: StandardLP) -> Measures:
    tau = it.tau
    nb = 1 + norm_inf(std.b)
    nu = 1 + norm_inf(std.upper)
    nc = 1 + norm_inf(std.c)
    ctx = _dot(std.c, it.x)
    bty = _dot(std.b, it.y) - _dot(std.upper, it.z)
    return Measures(
        pres=norm_inf(it.rp) / (tau * nb),
        ures=norm_inf(it.ru) / (tau * nu),
        dres=norm_inf(it.rd) / (tau * nc),
        gap=abs(ctx - bty) / (tau + abs(bty)),
        pobj=ctx / tau + std.c0,
        dobj=bty / tau + std.c0,
        ctx=ctx,
        bty=bty,
    )


def _ray_quality(it: Iterate, std: StandardLP):
    """How far ``x`` is from a primal ray: ``max(|A x|, x_I)``."""
    v = norm_inf(linalg.matvec(std.A, it.x))
    if len(std.bounded):
        v = max(v, norm_inf(it.x[std.bounded]))
    return v


def _farkas_quality(it: Iterate, std: StandardLP):
    """Largest positive entry of ``A^T y - U^T z`` (zero for an exact Farkas ray)."""
    g = linalg.rmatvec(std.A, it.y)
    if len(std.bounded):
        g = g.copy()
        g[std.bounded] -= it.z
    return max(g.max(initial=0), 0)


def check_termination(it: Iterate, std: StandardLP, params: Parameters) -> Status | None:
    """Return a final :class:`Status`, or ``None`` to continue iterating."""
    ms = measures(it, std)
    if ms.pres < params.eps_p and ms.ures < params.eps_p and ms.dres < params.eps_d and ms.gap < params.eps_g:
        return Status.Optimal
    if it.mu < params.eps_i and it.tau / it.kappa < params.eps_i:
        if ms.ctx < -params.eps_i and _ray_quality(it, std) <= params.eps_i * -ms.ctx:
            return Status.DualInfeasible
        if -ms.bty < -params.eps_i and _farkas_quality(it, std) <= params.eps_i * ms.bty:
            return Status.PrimalInfeasible
    if it.iteration >= params.max_iter:
        return Status.IterationLimit
    if time.perf_counter() - it.start > params.time_limit:
        return Status.TimeLimit
    return None


def _ratio(v, dv):
    neg = np.asarray(dv < 0, dtype=bool)
    if not neg.any():
        return None
    return (-v[neg] / dv[neg]).min()


def max_step(it: Iterate, d: Direction):
    """Largest ``alpha`` in [0, 1] keeping ``(x, w, s, z, tau, kappa)`` non-negative."""
    alpha = 1.0
    for v, dv in ((it.x, d.dx), (it.w, d.dw), (it.s, d.ds), (it.z, d.dz)):
        r = _ratio(v, dv)
        if r is not None and r < alpha:
            alpha = r
    for v, dv in ((it.tau, d.dtau), (it.kappa, d.dkappa)):
        if dv < 0 and -v / dv < alpha:
            alpha = -v / dv
    return alpha


def mehrotra_gamma(alpha_aff, gamma_min: float):
    gamma = (1 - alpha_aff) ** 2 * min(gamma_min, 1 - alpha_aff)
    return gamma, 1 - gamma


def predictor(it: Iterate, ctx: NewtonContext, solver) -> Direction:
    rhs = NewtonRHS(it.rd.copy(), it.rp.copy(), it.ru.copy(), it.rg,
                    -it.x * it.s, -it.w * it.z, -it.tau * it.kappa)
    return newton_solve(ctx, solver, rhs)


def corrector_rhs(it: Iterate, aff: Direction, gamma, eta) -> NewtonRHS:
    gm = gamma * it.mu
    return NewtonRHS(eta * it.rd, eta * it.rp, eta * it.ru, eta * it.rg,
                     -it.x * it.s + gm - aff.dx * aff.ds,
                     -it.w * it.z + gm - aff.dw * aff.dz,
                     -it.tau * it.kappa + gm - aff.dtau * aff.dkappa)


def corrector(it: Iterate, aff: Direction, gamma, eta, ctx: NewtonContext, solver) -> Direction:
    return newton_solve(ctx, solver, corrector_rhs(it, aff, gamma, eta))


def _add(d: Direction, e: Direction, a=1) -> Direction:
    return Direction(d.dx + a * e.dx, d.dw + a * e.dw, d.dy + a * e.dy, d.ds + a * e.ds,
                     d.dz + a * e.dz, d.dtau + a * e.dtau, d.dkappa + a * e.dkappa)


def _target(p, lo, hi):
    t = p * 0
    low = np.asarray(p < lo, dtype=bool)
    high = np.asarray(p > hi, dtype=bool)
    t[low] = lo - p[low]
    t[high] = hi - p[high]
    return t


def correction_rhs(it: Iterate, d: Direction, gamma, params: Parameters):
    """Targets ``(v, v_w, v0)`` of one centrality correction around direction ``d``."""
    amax = max_step(it, d)
    ab = min(1, 2 * amax)
    px = (it.x + ab * d.dx) * (it.s + ab * d.ds)
    pw = (it.w + ab * d.dw) * (it.z + ab * d.dz)
    p0 = np.array([(it.tau + ab * d.dtau) * (it.kappa + ab * d.dkappa)], dtype=px.dtype)
    lo = gamma * it.mu * params.beta
    hi = gamma * it.mu / params.beta
    tx, tw, t0 = _target(px, lo, hi), _target(pw, lo, hi), _target(p0, lo, hi)
    shift = (tx.sum() + tw.sum() + t0[0]) / it.ncomp
    return tx - shift, tw - shift, t0[0] - shift


def centrality_correction(it: Iterate, d: Direction, gamma, params: Parameters,
                          ctx: NewtonContext, solver):
    """Return ``(direction, accepted, alpha_max)``; ``direction`` is ``d`` if rejected."""
    alpha0 = max_step(it, d)
    v, vw, v0 = correction_rhs(it, d, gamma, params)
    n, m = len(it.x), len(it.y)
    zero = it.x[:0].sum() * 0
    rhs = NewtonRHS(it.x * 0, it.y * 0 if m else it.y.copy(), it.w * 0, zero, v, vw, v0)
    dc = newton_solve(ctx, solver, rhs)
    cand = _add(d, dc)
    alpha = max_step(it, cand)
    if alpha > alpha0:
        return cand, True, alpha
    return d, False, alpha0


def decay_regularizations(reg: Regularizations, params: Parameters) -> Regularizations:
    f = params.reg_floor
    reg.rho_p = max(f, reg.rho_p / params.reg_divisor)
    reg.rho_d = max(f, reg.rho_d / params.reg_divisor)
    reg.rho_g = max(f, reg.rho_g / params.reg_divisor)
    reg.rescues = 0
    return reg


def rescue_regularizations(reg: Regularizations, params: Parameters) -> Regularizations:
    # a zero regularization cannot be scaled up; restart it from the floor
    base = params.reg_floor or math.sqrt(FLOAT64.eps)
    reg.rho_p = (reg.rho_p or base) * params.reg_rescue
    reg.rho_d = (reg.rho_d or base) * params.reg_rescue
    reg.rho_g = (reg.rho_g or base) * params.reg_rescue
    reg.rescues += 1
    return reg


def update_regularizations(reg: Regularizations, params: Parameters, breakdown: bool = False):
    """Per-iteration decay, or the rescue increase after a numerical breakdown."""
    if breakdown:
        return rescue_regularizations(reg, params)
    return decay_regularizations(reg, params)


def take_step(it: Iterate, d: Direction, alpha, std: StandardLP) -> Iterate:
    it.x = it.x + alpha * d.dx
    it.w = it.w + alpha * d.dw
    it.y = it.y + alpha * d.dy
    it.s = it.s + alpha * d.ds
    it.z = it.z + alpha * d.dz
    it.tau = it.tau + alpha * d.dtau
    it.kappa = it.kappa + alpha * d.dkappa
    tiny = std.arith.tiny
    if tiny:
        # stop complementary pairs from underflowing to zero when run past convergence
        it.x, it.w, it.s, it.z = (np.maximum(v, tiny) for v in (it.x, it.w, it.s, it.z))
        it.tau, it.kappa = max(it.tau, tiny), max(it.kappa, tiny)
    it.iteration += 1
    return compute_residuals(it, std)


def _f(v) -> float:
    return float(v)


def _log_line(it: Iterate, ms: Measures, alpha, reg: Regularizations) -> str:
    return ("{:4d} {:+15.8e} {:+15.8e} {:9.2e} {:9.2e} {:9.2e} {:9.2e} {:7.4f} {:8.1e} {:8.1e} {:8.2f}"
            .format(it.iteration, _f(ms.pobj), _f(ms.dobj), max(_f(ms.pres), _f(ms.ures)),
                    _f(ms.dres), _f(ms.gap), _f(it.mu), _f(alpha), _f(reg.rho_p), _f(reg.rho_d),
                    time.perf_counter() - it.start))


def iterate_direction(it: Iterate, ctx: NewtonContext, solver, params: Parameters):
    """Predictor, corrector and centrality corrections for one iteration."""
    aff = predictor(it, ctx, solver)
    if not aff.is_finite():
        raise NumericalBreakdown("non-finite affine direction")
    alpha_aff = max_step(it, aff)
    gamma, eta = mehrotra_gamma(alpha_aff, params.gamma_min)
    d = corrector(it, aff, gamma, eta, ctx, solver)
    if not d.is_finite():
        raise NumericalBreakdown("non-finite corrected direction")
    alpha = max_step(it, d)
    for _ in range(params.max_corrections):
        if alpha >= 1:
            break
        d, accepted, new_alpha = centrality_correction(it, d, gamma, params, ctx, solver)
        if not accepted:
            break
        grew = new_alpha >= params.correction_factor * alpha
        alpha = new_alpha
        if not grew:
            break
    return d, alpha


def solve(std: StandardLP, params: Parameters | None = None, kkt: str = "ldl",
          kkt_options: dict | None = None, solver=None, log=None) -> Solution:
    """Run the interior-point method on ``std`` and return a standard-form :class:`Solution`."""
    ar = std.arith
    params = (params or Parameters()).resolved(ar)
    lines = []

    def emit(s):
        lines.append(s)
        if log is not None:
            log(s)
        elif params.verbose:
            print(s)

    start = time.perf_counter()
    if solver is None:
        solver = kkt_setup(std.A, kkt, arith=ar, **(kkt_options or {}))
    emit(f"hsdlp homogeneous interior-point | arithmetic {ar.name} | KKT backend {solver.describe()}")
    emit(f"rows {std.m}  cols {std.n}  bounded {std.nbounded}")
    emit(LOG_HEADER)

    it = initialize(std)
    it.start = start
    reg = Regularizations(ar.scalar(params.reg_init), ar.scalar(params.reg_init), ar.scalar(params.reg_init))
    ctx = NewtonContext(std)
    alpha = 0.0
    emit(_log_line(it, measures(it, std), alpha, reg))
    status = None
    while True:
        status = check_termination(it, std, params)
        if status is not None:
            break
        try:
            ctx.update(solver, it.x, it.w, it.s, it.z, it.tau, it.kappa, reg.rho_p, reg.rho_d, reg.rho_g)
            d, amax = iterate_direction(it, ctx, solver, params)
        except NumericalBreakdown as exc:
            if reg.rescues >= params.rescue_limit:
                emit(f"numerical failure: {exc}")
                status = Status.NumericalFailure
                break
            rescue_regularizations(reg, params)
            emit(f"     breakdown ({exc}); regularizations raised to {float(reg.rho_p):.1e}")
            continue
        alpha = params.step_damping * amax
        take_step(it, d, alpha, std)
        decay_regularizations(reg, params)
        emit(_log_line(it, measures(it, std), alpha, reg))

    elapsed = time.perf_counter() - start
    emit(f"status {status.name} after {it.iteration} iterations, {elapsed:.3f}s")
    return _make_solution(status, it, std, lines, elapsed)


def _scale_ray(v):
    nrm = norm_inf(v)
    return v / nrm if nrm > 0 else v


def _make_solution(status: Status, it: Iterate, std: StandardLP, lines, elapsed) -> Solution:
    kw = dict(status=status, iterations=it.iteration, solve_time=elapsed, log=lines)
    if status is Status.DualInfeasible:
        return Solution(primal_ray=_scale_ray(it.x), **kw)
    if status is Status.PrimalInfeasible:
        return Solution(dual_ray=_scale_ray(it.y), z=_scale_ray(it.z) if len(it.z) else it.z, **kw)
    if status is Status.NumericalFailure and not (it.tau > 0):
        return Solution(**kw)
    tau = it.tau
    x = it.x / tau
    return Solution(x=x, y=it.y / tau, s=it.s / tau, z=it.z / tau, w=it.w / tau,
                    objective=_dot(std.c, x) + std.c0, **kw)
