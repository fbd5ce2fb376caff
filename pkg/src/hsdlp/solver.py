"""End-to-end pipeline: presolve, scaling, standard form, IPM, and the way back."""

from __future__ import annotations

import time

import numpy as np

from . import ipm
from .arith import Arithmetic, get_arithmetic
from .presolve import postsolve, presolve as run_presolve, scale, unscale, farkas_margin, primal_ray_valid
from .problem import GeneralLP, Solution, Status, to_standard_form, uncrush


def solve(lp: GeneralLP, params: ipm.Parameters | None = None, kkt: str = "ldl",
          presolve: bool = True, scaling: bool = True, arithmetic: str | Arithmetic | None = None,
          kkt_options: dict | None = None, log=None) -> Solution:
    """Solve a general-form LP and return a solution in its original space."""
    ar = get_arithmetic(arithmetic)
    t0 = time.perf_counter()
    state = None
    work = lp
    pre_log = []
    if presolve:
        work, state = run_presolve(lp)
        kept = (state.row_active.sum(), state.col_active.sum())
        pre_log.append(f"presolve: {lp.m}x{lp.n} -> {kept[0]}x{kept[1]}  {state.status.value}"
                       + (f" ({state.message})" if state.message else ""))
        if log is not None:
            log(pre_log[-1])
        if work is None:
            sol = state.solution
            if sol.status in (Status.PrimalInfeasible, Status.DualInfeasible) and not state.certificate_verified:
                # presolve saw the conflict but its certificate does not survive the earlier
                # reductions; let the IPM produce one on the original problem
                pre_log.append("presolve certificate not self-contained; solving without presolve")
                if log is not None:
                    log(pre_log[-1])
                return solve(lp, params, kkt, False, scaling, ar, kkt_options, log)
            sol.log = pre_log
            sol.solve_time = time.perf_counter() - t0
            return sol
    factors = None
    if scaling and work.m and work.n:
        work, factors = scale(work)
    std, vmap = to_standard_form(work, ar)
    sol = ipm.solve(std, params, kkt=kkt, kkt_options=kkt_options, log=log)
    gen = uncrush(sol, vmap)
    if factors is not None:
        gen = unscale(gen, factors)
    if state is not None:
        gen = postsolve(state, gen)
    gen.log = pre_log + list(sol.log)
    gen.solve_time = time.perf_counter() - t0
    return gen


def verify_certificate(lp: GeneralLP, sol: Solution) -> bool:
    """Check a returned infeasibility certificate against ``lp``."""
    if sol.status is Status.PrimalInfeasible:
        return farkas_margin(lp, sol.dual_ray) > 0
    if sol.status is Status.DualInfeasible:
        return primal_ray_valid(lp, sol.primal_ray)
    return False


def primal_residual(lp: GeneralLP, x) -> float:
    """Largest absolute violation of rows and bounds at ``x``."""
    x = np.asarray(x, dtype=float)
    ax = lp.A @ x
    v = [np.maximum(lp.row_lower - ax, 0), np.maximum(ax - lp.row_upper, 0),
         np.maximum(lp.col_lower - x, 0), np.maximum(x - lp.col_upper, 0)]
    return float(max((np.max(t) if len(t) else 0.0) for t in v))
