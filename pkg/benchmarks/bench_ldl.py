"""Compiled vs pure-Python sparse LDL^T kernels on random augmented systems.

    python benchmarks/bench_ldl.py [--sizes 200 400 800] [--density 0.01] [--repeat 3]

For each size the script factors the regularized augmented system of a random
sparse ``A`` (m = n/2) with both kernel sets, checks that the two solutions
agree, and prints the best-of-``repeat`` times for the symbolic phase, the
numeric factorization and one solve.  "setup" includes the fill-reducing
ordering, which is shared Python code, so only "factor" and "solve" isolate
the kernels.
"""

import argparse
import sys
import time

import numpy as np
import scipy.sparse as sp

from hsdlp._kernels import HAVE_COMPILED
from hsdlp.kkt.ldl import SparseLDLSolver


def best_of(repeat, fn):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def run_case(A, compiled, repeat, theta, xi_d, xi_p):
    t_setup, solver = best_of(repeat, lambda: SparseLDLSolver(A, compiled=compiled))
    t_fact, _ = best_of(repeat, lambda: solver.update(theta, 1e-8, 1e-8))
    t_solve, (dx, dy) = best_of(repeat, lambda: solver.solve(xi_d, xi_p))
    return dict(setup=t_setup, factor=t_fact, solve=t_solve, nnz=solver.factor_nnz, dx=dx, dy=dy)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 400, 800], help="number of columns n")
    ap.add_argument("--density", type=float, default=0.01)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not HAVE_COMPILED:
        print("compiled kernels are not available; build the extension first", file=sys.stderr)
        return 1

    rng = np.random.default_rng(args.seed)
    print("n\tm\tnnz(L)\tphase\tcompiled_s\tpython_s\tspeedup")
    for n in args.sizes:
        m = n // 2
        A = sp.random(m, n, density=args.density, random_state=rng, format="csc")
        A = (A + sp.eye(m, n, format="csc")).tocsc()  # full row rank
        theta = rng.uniform(0.1, 10, n)
        xi_d, xi_p = rng.standard_normal(n), rng.standard_normal(m)
        fast = run_case(A, True, args.repeat, theta, xi_d, xi_p)
        slow = run_case(A, False, args.repeat, theta, xi_d, xi_p)
        err = max(np.abs(fast["dx"] - slow["dx"]).max(), np.abs(fast["dy"] - slow["dy"]).max())
        if err > 1e-8 * (1 + np.abs(fast["dx"]).max()):
            print(f"kernels disagree at n={n}: {err:.2e}", file=sys.stderr)
            return 1
        for phase in ("setup", "factor", "solve"):
            a, b = fast[phase], slow[phase]
            print(f"{n}\t{m}\t{fast['nnz']}\t{phase}\t{a:.6f}\t{b:.6f}\t{b / a:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
