import numpy as np
import pytest
import scipy.sparse as sp

from hsdlp.arith import Extended
from hsdlp.kkt import (DegenerateTau, NewtonContext, NewtonRHS, NumericalBreakdown,
                       PreconditionError, UnsupportedMatrixKind, newton_solve, setup)
from hsdlp.kkt.dense import ldl_dense, ldl_dense_solve
from hsdlp.kkt.newton import newton_matrix_dense, stack_rhs
from hsdlp.problem import StandardLP


def augmented_dense(A, theta, rho_p, rho_d):
    A = np.asarray(A.toarray() if sp.issparse(A) else A, dtype=float)
    m, n = A.shape
    return np.block([[-np.diag(1 / theta + rho_p), A.T], [A, rho_d * np.eye(m)]])


@pytest.mark.parametrize("backend", ["ldl", "dense"])
def test_one_by_one(backend):
    s = setup(sp.csc_matrix([[1.0]]), backend)
    s.update(np.ones(1), 1.0, 1.0)
    dx, dy = s.solve(np.ones(1), np.ones(1))
    assert dx == pytest.approx([0.0], abs=1e-14)
    assert dy == pytest.approx([1.0])


@pytest.mark.parametrize("backend", ["ldl", "dense"])
def test_zero_rhs(backend):
    rng = np.random.default_rng(0)
    A = sp.random(4, 6, density=0.5, random_state=1, format="csc")
    s = setup(A, backend)
    s.update(rng.uniform(0.5, 2, 6), 1e-2, 1e-2)
    dx, dy = s.solve(np.zeros(6), np.zeros(4))
    assert not dx.any() and not dy.any()


@pytest.mark.parametrize("backend", ["ldl", "dense"])
@pytest.mark.parametrize("seed", range(5))
def test_random_against_dense_oracle(backend, seed):
    rng = np.random.default_rng(seed)
    A = sp.random(5, 8, density=0.4, random_state=seed, format="csc") + sp.eye(5, 8)
    theta = rng.uniform(1e-2, 1e2, 8)
    s = setup(A.tocsc(), backend)
    s.update(theta, 1e-4, 1e-4)
    xi_d, xi_p = rng.standard_normal(8), rng.standard_normal(5)
    dx, dy = s.solve(xi_d, xi_p)
    K = augmented_dense(A, theta, 1e-4, 1e-4)
    ref = np.linalg.solve(K, np.concatenate([xi_d, xi_p]))
    np.testing.assert_allclose(np.concatenate([dx, dy]), ref, rtol=1e-8, atol=1e-10)
    res = K @ np.concatenate([dx, dy]) - np.concatenate([xi_d, xi_p])
    assert np.abs(res).max() <= 1e-8 * (1 + max(np.abs(xi_d).max(), np.abs(xi_p).max()))


def test_backends_agree_on_10x20():
    rng = np.random.default_rng(7)
    A = sp.random(10, 20, density=0.3, random_state=7, format="csc")
    theta = rng.uniform(0.1, 10, 20)
    xi_d, xi_p = rng.standard_normal(20), rng.standard_normal(10)
    out = []
    for backend in ("ldl", "dense"):
        s = setup(A, backend)
        s.update(theta, 1e-3, 1e-3)
        out.append(np.concatenate(s.solve(xi_d, xi_p)))
    np.testing.assert_allclose(out[0], out[1], rtol=1e-8, atol=1e-8)


def test_rank_deficient_quasidefinite():
    A = sp.csc_matrix(np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]]))
    for backend in ("ldl", "dense"):
        s = setup(A, backend)
        s.update(np.ones(3), 1e-6, 1e-6)
        dx, dy = s.solve(np.ones(3), np.ones(3))
        assert np.all(np.isfinite(dx)) and np.all(np.isfinite(dy))


def test_first_example_matrix():
    A = sp.csc_matrix(np.array([[1.0, 2.0], [0.0, 3.0]]))
    s = setup(A, "ldl")
    s.update(np.ones(2), 1.0, 1.0)
    K = augmented_dense(A, np.ones(2), 1.0, 1.0)
    assert np.allclose(K[:2, :2], -2 * np.eye(2))
    rhs = np.array([1.0, -1.0, 2.0, 0.5])
    np.testing.assert_allclose(np.concatenate(s.solve(rhs[:2], rhs[2:])), np.linalg.solve(K, rhs))


def test_theta_zero_rejected():
    s = setup(sp.csc_matrix([[1.0, 1.0]]), "ldl")
    with pytest.raises(PreconditionError):
        s.update(np.array([1.0, 0.0]), 1.0, 1.0)
    with pytest.raises(PreconditionError):
        s.update(np.ones(2), -1.0, 1.0)


def test_unbound_solve_rejected():
    s = setup(sp.csc_matrix([[1.0]]), "dense")
    with pytest.raises(PreconditionError):
        s.solve(np.ones(1), np.ones(1))


def test_breakdown_on_singular_without_regularization():
    A = sp.csc_matrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
    for backend in ("ldl", "dense"):
        s = setup(A, backend)
        with pytest.raises(NumericalBreakdown):
            s.update(np.ones(2), 0.0, 0.0)


def test_dense_backend_rejects_operator():
    class Op:
        shape = (2, 2)

        def matvec(self, x):
            return x

        def rmatvec(self, y):
            return y

    with pytest.raises(UnsupportedMatrixKind):
        setup(Op(), "dense")


def test_unknown_backend():
    with pytest.raises(ValueError):
        setup(sp.csc_matrix([[1.0]]), "nope")


def test_dense_column_no_densification():
    # one dense column and one dense row on top of a diagonal
    n = 400
    A = sp.lil_matrix((n, n))
    A.setdiag(1.0)
    A[:, 0] = 1.0
    A[0, :] = 1.0
    s = setup(A.tocsc(), "ldl")
    nnz_A = A.nnz
    assert s.factor_nnz <= 4 * nnz_A
    s.update(np.ones(n), 1e-8, 1e-8)
    rng = np.random.default_rng(0)
    xi_d, xi_p = rng.standard_normal(n), rng.standard_normal(n)
    dx, dy = s.solve(xi_d, xi_p)
    K = augmented_dense(A.tocsc(), np.ones(n), 1e-8, 1e-8)
    res = K @ np.concatenate([dx, dy]) - np.concatenate([xi_d, xi_p])
    assert np.abs(res).max() < 1e-8 * (1 + np.abs(np.concatenate([xi_d, xi_p])).max())
    # factor does not grow after numeric factorization
    assert s.factor_nnz == int(s.Lp[-1])


def test_sparse_backend_extended_precision():
    ar = Extended(113)
    A = np.array([[2.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 3.0]])
    Ao = ar.asarray(A)
    s = setup(Ao, "ldl", arith=ar)
    s.update(ar.ones(3), ar.scalar(1e-20), ar.scalar(1e-20))
    xi_d, xi_p = ar.asarray([1.0, 2.0, 3.0]), ar.asarray([0.5, -1.0, 2.0])
    dx, dy = s.solve(xi_d, xi_p)
    assert dx.dtype == object
    rd, rp = s.residual(dx, dy, xi_d, xi_p)
    assert max(abs(float(v)) for v in np.concatenate([rd, rp])) < 1e-28


def test_dense_backend_extended_precision():
    ar = Extended(113)
    A = ar.asarray(np.array([[2.0, 1.0, 0.0], [0.0, 1.0, 1.0]]))
    s = setup(A, "dense", arith=ar)
    s.update(ar.ones(3), ar.scalar(0), ar.scalar(0))
    dx, dy = s.solve(ar.asarray([1.0, 0.0, 1.0]), ar.asarray([1.0, 1.0]))
    rd, rp = s.residual(dx, dy, ar.asarray([1.0, 0.0, 1.0]), ar.asarray([1.0, 1.0]))
    assert max(abs(float(v)) for v in np.concatenate([rd, rp])) < 1e-28


def test_ldl_dense_generic():
    rng = np.random.default_rng(3)
    B = rng.standard_normal((6, 6))
    S = B @ B.T + 6 * np.eye(6)
    L, d = ldl_dense(S)
    np.testing.assert_allclose(L @ np.diag(d) @ L.T, S, atol=1e-12)
    b = rng.standard_normal(6)
    np.testing.assert_allclose(ldl_dense_solve(L, d, b), np.linalg.solve(S, b))
    with pytest.raises(NumericalBreakdown):
        ldl_dense(-S)


# Newton system ------------------------------------------------------------


def random_newton_case(rng, m, n, bounded, all_ones=False, rho=(1.0, 1.0, 1.0)):
    A = rng.standard_normal((m, n))
    k = len(bounded)
    std = StandardLP.create(sp.csc_matrix(A), rng.standard_normal(m), rng.standard_normal(n),
                            bounded, rng.uniform(1, 3, k))
    if all_ones:
        x, s, w, z = np.ones(n), np.ones(n), np.ones(k), np.ones(k)
        tau = kappa = 1.0
    else:
        x, s = rng.uniform(0.1, 3, n), rng.uniform(0.1, 3, n)
        w, z = rng.uniform(0.1, 3, k), rng.uniform(0.1, 3, k)
        tau, kappa = rng.uniform(0.5, 2), rng.uniform(0.5, 2)
    return std, (x, w, s, z, tau, kappa) + tuple(rho)


def random_rhs(rng, m, n, k):
    return NewtonRHS(rng.standard_normal(n), rng.standard_normal(m), rng.standard_normal(k),
                     rng.standard_normal(), rng.standard_normal(n), rng.standard_normal(k),
                     rng.standard_normal())


def direction_vector(d):
    return np.concatenate([np.atleast_1d(np.asarray(v, dtype=float)) for v in d.blocks()])


@pytest.mark.parametrize("backend", ["ldl", "dense"])
@pytest.mark.parametrize("m,n,bounded,ones", [(1, 2, [], True), (2, 3, [1], False),
                                              (4, 9, [0, 3, 8], False), (5, 12, list(range(12)), False)])
def test_newton_against_dense_7_block(backend, m, n, bounded, ones):
    rng = np.random.default_rng(m * 100 + n)
    std, it = random_newton_case(rng, m, n, bounded, all_ones=ones)
    solver = setup(std.A, backend)
    ctx = NewtonContext(std)
    ctx.update(solver, *it)
    rhs = random_rhs(rng, m, n, len(bounded))
    d = newton_solve(ctx, solver, rhs)
    M, _ = newton_matrix_dense(std, *it)
    ref = np.linalg.solve(M, stack_rhs(rhs))
    got = direction_vector(d)
    np.testing.assert_allclose(got, ref, rtol=1e-8, atol=1e-9)
    res = M @ got - stack_rhs(rhs)
    assert np.abs(res).max() <= 1e-8 * (1 + np.abs(stack_rhs(rhs)).max())


def test_newton_zero_rhs_and_cache():
    rng = np.random.default_rng(1)
    std, it = random_newton_case(rng, 3, 5, [2])
    solver = setup(std.A, "ldl")
    ctx = NewtonContext(std)
    ctx.update(solver, *it)
    z = NewtonRHS(np.zeros(5), np.zeros(3), np.zeros(1), 0.0, np.zeros(5), np.zeros(1), 0.0)
    for _ in range(4):
        d = newton_solve(ctx, solver, z)
        assert not direction_vector(d).any()
    assert ctx.pq_solves == 1
    assert solver.n_solves == 1 + 4
    ctx.update(solver, *it)
    assert ctx.pq_solves == 2


def test_newton_without_regularization_matches_oracle():
    rng = np.random.default_rng(11)
    std, it = random_newton_case(rng, 3, 6, [0, 5], rho=(0.0, 0.0, 0.0))
    solver = setup(std.A, "ldl")
    ctx = NewtonContext(std)
    ctx.update(solver, *it)
    rhs = random_rhs(rng, 3, 6, 2)
    d = newton_solve(ctx, solver, rhs)
    M, _ = newton_matrix_dense(std, *it)
    np.testing.assert_allclose(direction_vector(d), np.linalg.solve(M, stack_rhs(rhs)), rtol=1e-7, atol=1e-9)


def test_degenerate_tau_detected():
    rng = np.random.default_rng(2)
    std, it = random_newton_case(rng, 1, 2, [])
    solver = setup(std.A, "ldl")
    ctx = NewtonContext(std)
    ctx.update(solver, *it)
    ctx.den = -1.0
    with pytest.raises(DegenerateTau):
        newton_solve(ctx, solver, random_rhs(rng, 1, 2, 0))
