import time

import numpy as np
import pytest
import scipy.sparse as sp

from hsdlp import ipm
from hsdlp.arith import get_arithmetic
from hsdlp.block_angular import (BlockAngularSolver, UnitBlockAngularMatrix, detect, factorize,
                                 read_uba, solve_normal, write_uba)
from hsdlp.kkt import NumericalBreakdown, PreconditionError, UnsupportedMatrixKind, setup
from hsdlp.problem import StandardLP, Status


def random_uba(rng, R=4, m0=3, n0=2, nmax=4):
    blocks = [rng.standard_normal((m0, int(rng.integers(1, nmax + 1)))) for _ in range(R)]
    return UnitBlockAngularMatrix(blocks, rng.standard_normal((m0, n0)), m0)


def dense_normal(mat, theta, rho_p, rho_d):
    A = mat.to_dense().astype(float)
    t = 1 / (1 / theta + rho_p)
    return (A * t) @ A.T + rho_d * np.eye(A.shape[0])


def master_lp(rng, R, m0, nr=(2, 6), density=1.0):
    blocks = [rng.uniform(0, 1, (m0, int(rng.integers(*nr)))) for _ in range(R)]
    blocks = [B * (rng.random(B.shape) < density) for B in blocks]
    mat = UnitBlockAngularMatrix(blocks, np.hstack([np.eye(m0), -np.eye(m0)]), m0)
    lam = np.concatenate([rng.dirichlet(np.ones(B.shape[1])) for B in blocks])
    b = np.concatenate([np.ones(R), mat.AB @ lam])
    c = np.concatenate([rng.uniform(0, 1, mat.nb), 100 * np.ones(2 * m0)])
    return StandardLP.create(mat, b, c)


EX = UnitBlockAngularMatrix([[[1.0, 2.0]]])


# --- products -------------------------------------------------------------------


def test_matvec_example():
    np.testing.assert_array_equal(EX.matvec(np.ones(2)), [2, 3])
    assert not EX.matvec(np.zeros(2)).any()
    np.testing.assert_array_equal(EX.to_dense(), [[1, 1], [1, 2]])


@pytest.mark.parametrize("seed", range(5))
def test_products_match_dense(seed):
    rng = np.random.default_rng(seed)
    mat = random_uba(rng, R=int(rng.integers(1, 9)), m0=int(rng.integers(0, 5)), n0=int(rng.integers(0, 3)))
    D = mat.to_dense()
    v, y = rng.standard_normal(mat.shape[1]), rng.standard_normal(mat.shape[0])
    assert np.abs(mat.matvec(v) - D @ v).max() <= 1e-12
    assert np.abs(mat.rmatvec(y) - D.T @ y).max() <= 1e-12
    assert (mat.to_sparse() != sp.csc_matrix(D)).nnz == 0


def test_shape_validation():
    with pytest.raises(ValueError):
        UnitBlockAngularMatrix([])
    with pytest.raises(ValueError):
        UnitBlockAngularMatrix([np.zeros((2, 0))])
    with pytest.raises(ValueError):
        UnitBlockAngularMatrix([np.ones((2, 1)), np.ones((3, 1))])


# --- factorization ----------------------------------------------------------------


def test_factorize_example():
    f = factorize(EX, np.ones(2), 0.0, 0.0)
    assert f.d[0] == 2 and f.l[0, 0] == 1.5
    assert f.dC[0] == pytest.approx(0.5)  # C = Phi - 3*3/2 = 5 - 4.5
    np.testing.assert_allclose(solve_normal(f, np.array([1.0, 1.0])), [2, -1])
    S = np.array([[2.0, 3], [3, 5]])
    np.testing.assert_allclose(S @ [2, -1], [1, 1])
    assert not solve_normal(f, np.zeros(2)).any()


def test_regularized_schur_always_spd():
    # theta close to zero: the Phi term vanishes and rho_d keeps C positive definite
    rng = np.random.default_rng(0)
    mat = random_uba(rng)
    f = factorize(mat, np.full(mat.shape[1], 1e-12), 0.0, 1.0)
    assert np.all(f.dC > 0) and np.all(f.d > 0)
    np.testing.assert_allclose(f.dC, 1.0, rtol=1e-9)


def test_schur_matches_dense_cholesky():
    rng = np.random.default_rng(4)
    mat = random_uba(rng, R=4, m0=3)
    theta = rng.uniform(0.1, 2, mat.shape[1])
    f = factorize(mat, theta, 1e-3, 1e-2)
    S = dense_normal(mat, theta, 1e-3, 1e-2)
    R = mat.R
    C = S[R:, R:] - S[R:, :R] @ np.linalg.solve(S[:R, :R], S[:R, R:])
    Lc = np.linalg.cholesky(C)
    np.testing.assert_allclose(f.L_C * np.sqrt(f.dC), Lc, rtol=1e-10, atol=1e-10 * np.abs(Lc).max())


@pytest.mark.parametrize("seed", range(10))
def test_factor_equality(seed):
    rng = np.random.default_rng(seed)
    mat = random_uba(rng, R=int(rng.integers(1, 9)), m0=int(rng.integers(1, 6)), n0=int(rng.integers(0, 3)))
    theta = np.exp(rng.uniform(-3, 3, mat.shape[1]))
    f = factorize(mat, theta, 1e-4, 1e-4)
    L, d = f.materialize()
    S = dense_normal(mat, theta, 1e-4, 1e-4)
    assert np.linalg.norm((L * d) @ L.T - S) <= 1e-10 * np.linalg.norm(S)


@pytest.mark.parametrize("seed", range(10))
def test_solve_normal_matches_dense(seed):
    rng = np.random.default_rng(100 + seed)
    m0 = int(rng.integers(1, 9))
    # enough linking columns for full row rank, so the dense oracle itself is accurate
    mat = random_uba(rng, R=int(rng.integers(1, 65)), m0=m0, n0=m0 + 1)
    theta = rng.uniform(0.01, 10, mat.shape[1])
    f = factorize(mat, theta, 1e-6, 1e-6)
    xi = rng.standard_normal(mat.shape[0])
    ref = np.linalg.solve(dense_normal(mat, theta, 1e-6, 1e-6), xi)
    got = solve_normal(f, xi)
    assert np.abs(got - ref).max() <= 1e-9 * np.abs(ref).max()


def test_negative_regularization_rejected_and_breakdown():
    with pytest.raises(PreconditionError):
        factorize(EX, np.ones(2), 0.0, -1.0)
    # identical columns in a single block: C is exactly singular without rho_d
    mat = UnitBlockAngularMatrix([np.ones((1, 2))])
    with pytest.raises(NumericalBreakdown):
        factorize(mat, np.ones(2), 0.0, 0.0)


def test_storage_reused_across_updates():
    rng = np.random.default_rng(2)
    mat = random_uba(rng)
    solver = setup(mat, "block-angular")
    solver.update(np.ones(mat.shape[1]), 1e-3, 1e-3)
    f = solver.factor
    bufs = [id(b) for b in (f.d, f.l, f.C, f.dC, f.W, f.U)]
    solver.update(rng.uniform(0.5, 2, mat.shape[1]), 1e-4, 1e-4)
    assert solver.factor is f and [id(b) for b in (f.d, f.l, f.C, f.dC, f.W, f.U)] == bufs
    assert f.n_factorizations == 2


def test_factorize_linear_in_blocks():
    # doubling R may cost at most 2.5x, i.e. a log-log slope of at most log2(2.5).
    # Repeats are interleaved across sizes so background load hits them alike.
    rng = np.random.default_rng(3)
    sizes = (8000, 16000, 32000)
    cases = []
    for R in sizes:
        mat = random_uba(rng, R=R, m0=8, nmax=6)
        theta = rng.uniform(0.5, 2, mat.shape[1])
        cases.append((mat, theta, factorize(mat, theta, 1e-6, 1e-6)))
    best = [np.inf] * len(sizes)
    for _ in range(11):
        for i, (mat, theta, f) in enumerate(cases):
            t = time.perf_counter()
            factorize(mat, theta, 1e-6, 1e-6, f)
            best[i] = min(best[i], time.perf_counter() - t)
    slope = np.polyfit(np.log2(sizes), np.log2(best), 1)[0]
    assert slope <= np.log2(2.5), (best, slope)


def test_extended_precision_factorization():
    ext = get_arithmetic("extended")
    mat = random_uba(np.random.default_rng(5), R=3, m0=2)
    solver = setup(mat, "block-angular", arith=ext)
    theta = ext.asarray(np.linspace(0.5, 2, mat.shape[1]))
    solver.update(theta, ext.scalar(0), ext.scalar(1e-20))
    xi_d, xi_p = ext.asarray(np.ones(mat.shape[1])), ext.asarray(np.ones(mat.shape[0]))
    dx, dy = solver.solve(xi_d, xi_p)
    rd, rp = solver.residual(dx, dy, xi_d, xi_p)
    assert max(abs(v) for v in np.concatenate([rd, rp])) < 1e-28


# --- KKT adapter --------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(4))
def test_adapter_augmented_residual(seed):
    rng = np.random.default_rng(seed)
    mat = random_uba(rng, R=6, m0=3)
    solver = setup(mat, "block-angular")
    theta = rng.uniform(0.1, 5, mat.shape[1])
    solver.update(theta, 1e-6, 1e-6)
    xi_d, xi_p = rng.standard_normal(mat.shape[1]), rng.standard_normal(mat.shape[0])
    dx, dy = solver.solve(xi_d, xi_p)
    rd, rp = solver.residual(dx, dy, xi_d, xi_p)
    assert max(np.abs(rd).max(), np.abs(rp).max()) <= 1e-8 * (1 + max(np.abs(xi_d).max(), np.abs(xi_p).max()))
    ref = setup(mat.to_sparse(), "ldl")
    ref.update(theta, 1e-6, 1e-6)
    rx, ry = ref.solve(xi_d, xi_p)
    np.testing.assert_allclose(dx, rx, atol=1e-8)
    np.testing.assert_allclose(dy, ry, atol=1e-8)
    zx, zy = solver.solve(np.zeros(mat.shape[1]), np.zeros(mat.shape[0]))
    assert not zx.any() and not zy.any()


def test_detect_permuted_structure():
    rng = np.random.default_rng(8)
    mat = random_uba(rng, R=5, m0=2, n0=2)
    D = mat.to_dense()
    pr, pc = rng.permutation(D.shape[0]), rng.permutation(D.shape[1])
    A = sp.csc_matrix(D[pr][:, pc])
    found = detect(A)
    assert found.matrix.R == 5 and found.matrix.m0 == 2
    np.testing.assert_array_equal(A.toarray()[found.rows][:, found.cols], found.matrix.to_dense())
    solver = BlockAngularSolver(A)
    theta = rng.uniform(0.5, 2, D.shape[1])
    solver.update(theta, 1e-5, 1e-5)
    xi_d, xi_p = rng.standard_normal(D.shape[1]), rng.standard_normal(D.shape[0])
    dx, dy = solver.solve(xi_d, xi_p)
    rd, rp = solver.residual(dx, dy, xi_d, xi_p)
    assert max(np.abs(rd).max(), np.abs(rp).max()) < 1e-9


def test_no_structure_rejected():
    with pytest.raises(UnsupportedMatrixKind):
        setup(sp.csc_matrix([[2.0, 1.0], [1.0, 3.0]]), "block-angular")


def test_ipm_trajectory_matches_sparse_backend(monkeypatch):
    std = master_lp(np.random.default_rng(11), R=12, m0=3)
    traces = {}
    real = ipm.take_step
    for backend in ("ldl", "block-angular"):
        trace = traces[backend] = []

        def spy(it, d, alpha, s, trace=trace):
            out = real(it, d, alpha, s)
            trace.append(np.concatenate([out.x, out.y, out.s, [out.tau, out.kappa]]))
            return out

        monkeypatch.setattr(ipm, "take_step", spy)
        traces[backend + "_sol"] = ipm.solve(std, kkt=backend)
    for a, b in zip(traces["ldl"][:5], traces["block-angular"][:5]):
        assert np.abs(a - b).max() <= 1e-6
    s1, s2 = traces["ldl_sol"], traces["block-angular_sol"]
    assert s1.status is s2.status is Status.Optimal
    assert s2.objective == pytest.approx(s1.objective, rel=1e-7)
    assert abs(s1.iterations - s2.iterations) <= 3
    assert "block-angular" in s2.log[0]


# --- text format -----------------------------------------------------------------------


def test_text_round_trip():
    rng = np.random.default_rng(9)
    mat = random_uba(rng, R=3, m0=2, n0=1)
    c, b = rng.standard_normal(mat.shape[1]), rng.standard_normal(mat.shape[0])
    text = write_uba(mat, c, b)
    assert text.startswith("UBA 3 2 1\nNR ")
    back, c2, b2 = read_uba("# fixture\n" + text)
    np.testing.assert_array_equal(back.to_dense(), mat.to_dense())
    np.testing.assert_array_equal(c2, c)
    np.testing.assert_array_equal(b2, b)
    m3, c3, b3 = read_uba(write_uba(mat))
    assert c3 is None and b3 is None and m3.shape == mat.shape


@pytest.mark.parametrize("bad", ["", "UBA 1 1\n", "UBA 1 1 0\nNR 1\nBLOCK 1\n1 2\nA0\nEND\n",
                                 "UBA 1 1 0\nNR 1\nBLOCK 1\n1\nA0\nFOO\nEND\n"])
def test_text_errors(bad):
    with pytest.raises(ValueError):
        read_uba(bad)
