import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combpc import amg
from combpc.errors import SetupError
from combpc.ilu import ichol
from combpc.operators import DenseSolveOperator
from combpc.problems import Checkerboard, Lognormal, ProblemSpec, generate, laplacian, random_spd
from combpc.sparse import SparseMatrix
from combpc.spectral import assemble_dense_operator

from oracles import gs_matrix, vcycle_matrix


def _graph_laplacian(rng, n, density=0.3):
    W = np.triu(rng.random((n, n)) < density, 1) * rng.uniform(0.5, 2.0, (n, n))
    W = W + W.T
    for i in range(n - 1):  # keep it connected
        W[i, i + 1] = W[i + 1, i] = max(W[i, i + 1], 1.0)
    return SparseMatrix.from_dense(np.diag(W.sum(1)) - W)


def test_strength_threshold():
    M = np.array([[4.0, -1.0, -0.2, 0.5], [-1.0, 4.0, -1.0, 0.0], [-0.2, -1.0, 4.0, 0.0],
                  [0.5, 0.0, 0.0, 1.0]])
    G = amg.strength(SparseMatrix.from_dense(M), 0.25)
    assert G.strong(0).tolist() == [1]
    assert G.strong(1).tolist() == [0, 2]
    assert G.strong(2).tolist() == [1]
    assert G.strong(3).tolist() == []
    assert amg.strength(SparseMatrix.from_dense(M), 0.21).strong(0).tolist() == [1]
    assert amg.strength(SparseMatrix.from_dense(M), 0.2).strong(0).tolist() == [1, 2]
    with pytest.raises(ValueError):
        amg.strength(SparseMatrix.from_dense(M), 1.5)


def test_1d_splitting_and_weights():
    A = laplacian(7)
    G = amg.strength(A)
    s = amg.split(G)
    np.testing.assert_array_equal(s, [0, 1, 0, 1, 0, 1, 0])
    P = amg.interpolation(A, G, s).to_dense()
    expected = np.array([[0.5, 0, 0], [1, 0, 0], [0.5, 0.5, 0], [0, 1, 0],
                         [0, 0.5, 0.5], [0, 0, 1], [0, 0, 0.5]])
    np.testing.assert_array_equal(P, expected)


def _check_splitting(G, s):
    T = G.transpose()
    for i in range(G.n):
        deps = G.strong(i)
        if s[i] == amg.FINE and deps.size:
            assert np.any(s[deps] == amg.COARSE), f"F point {i} uncovered"


@pytest.mark.parametrize("field", [Checkerboard(1, 1e6, 4), Lognormal(3, 2.0)])
def test_splitting_covers_every_f_point(field):
    A = generate(ProblemSpec(cells=(14, 14), field=field)).A
    G = amg.strength(A)
    s = amg.split(G)
    _check_splitting(G, s)
    assert 0 < s.sum() < A.n_rows


@pytest.mark.parametrize("method", ["direct", "classical"])
def test_interpolation_preserves_constants_for_zero_row_sums(method, rng):
    A = _graph_laplacian(rng, 40)
    G = amg.strength(A)
    s = amg.split(G)
    P = amg.interpolation(A, G, s, method)
    np.testing.assert_allclose(P @ np.ones(P.n_cols), np.ones(A.n_rows), atol=1e-14)


def test_interpolation_injects_c_points(rng):
    A = generate(ProblemSpec(cells=(9, 9), field=Lognormal(1, 1.0))).A
    G = amg.strength(A)
    s = amg.split(G)
    P = amg.interpolation(A, G, s).to_dense()
    C = np.flatnonzero(s == amg.COARSE)
    np.testing.assert_array_equal(P[C], np.eye(C.size))
    assert np.all(P >= 0)


def test_missing_c_point_is_a_setup_error():
    A = laplacian(3)
    G = amg.strength(A)
    with pytest.raises(SetupError):
        amg.interpolation(A, G, np.array([0, 0, 1], dtype=np.int8))


def test_galerkin_asymmetry_trap(rng):
    A = laplacian(4)
    P = SparseMatrix.from_dense(rng.standard_normal((4, 2)))
    Ac = amg.galerkin(A, P)
    assert Ac.symmetric
    bad = SparseMatrix.from_dense(np.array([[2.0, 1.0], [0.0, 2.0]]))
    with pytest.raises(SetupError):
        amg.galerkin(bad, SparseMatrix.identity(2))


@pytest.mark.parametrize("interp", ["direct", "classical"])
def test_galerkin_identity_on_every_level(interp):
    A = generate(ProblemSpec(cells=(16, 16), field=Checkerboard(1, 1e4, 4))).A
    H = amg.setup(A, max_coarse=10, interp=interp)
    assert H.num_levels >= 3
    for fine, coarse in zip(H.levels[:-1], H.levels[1:]):
        Pd = fine.P.to_dense()
        ref = Pd.T @ fine.A.to_dense() @ Pd
        scale = np.abs(ref).max()
        assert np.abs(coarse.A.to_dense() - ref).max() <= 1e-13 * scale


def test_vcycle_matches_dense_recursion(rng):
    A = random_spd(60, rng, cond=1e3, density=0.1, m_matrix=True)
    H = amg.setup(A, max_coarse=8)
    levels = [(lev.A.to_dense(), None if lev.P is None else lev.P.to_dense(),
               None if lev.P is None else gs_matrix(lev.A.to_dense())) for lev in H.levels]
    np.testing.assert_allclose(assemble_dense_operator(H), vcycle_matrix(levels), atol=1e-10)


def test_two_cycles_square_the_error_propagation():
    A = generate(ProblemSpec(cells=(10, 10), field=Lognormal(0, 1.5))).A
    H1 = amg.setup(A, max_coarse=12)
    H2 = H1.with_cycles(2)
    Ad = A.to_dense()
    I = np.eye(A.n_rows)
    E1 = I - assemble_dense_operator(H1) @ Ad
    E2 = I - assemble_dense_operator(H2) @ Ad
    np.testing.assert_allclose(E2, E1 @ E1, atol=1e-12)


def test_hierarchy_is_symmetric_and_contractive():
    A = generate(ProblemSpec(cells=(12, 12), field=Checkerboard(1, 1e8, 4))).A
    H = amg.setup(A, max_coarse=10)
    D = assemble_dense_operator(H)
    np.testing.assert_allclose(D, D.T, atol=1e-12 * np.abs(D).max())
    L = np.linalg.cholesky(A.to_dense())
    E = np.eye(A.n_rows) - D @ A.to_dense()
    assert np.linalg.norm(L.T @ E @ np.linalg.inv(L.T), 2) < 1.0


def test_setup_limits_and_stats():
    A = laplacian(30, 30)
    H = amg.setup(A, max_coarse=50)
    st_ = H.stats()
    assert st_["sizes"][0] == 900 and st_["sizes"][-1] <= 50
    assert st_["sizes"] == sorted(st_["sizes"], reverse=True)
    assert 1.0 < H.operator_complexity() < 3.0
    assert 1.0 < H.grid_complexity() < 2.0
    assert isinstance(H.coarse_solver, DenseSolveOperator)
    assert amg.setup(A, max_levels=2).num_levels == 2
    assert amg.setup(A, max_coarse=2000).num_levels == 1
    with pytest.raises(ValueError):
        H.with_cycles(0)


def test_finest_ic_smoother():
    A = laplacian(12, 12)
    B = ichol(A, 0)
    H = amg.setup(A, finest_smoother=B, max_coarse=10)
    assert H.levels[0].smoother is B
    assert H.levels[1].smoother.kind.value == "gs-forward"
    D = assemble_dense_operator(H)
    np.testing.assert_allclose(D, D.T, atol=1e-11 * np.abs(D).max())


def test_large_coarse_level_uses_sparse_solver():
    A = laplacian(50, 50)
    H = amg.setup(A, max_levels=1)
    assert not isinstance(H.coarse_solver, DenseSolveOperator)
    f = np.ones(A.n_rows)
    np.testing.assert_allclose(A @ H.apply(f), f, atol=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.integers(20, 80), st.integers(0, 10_000))
def test_random_m_matrices_build_valid_hierarchies(n, seed):
    A = random_spd(n, np.random.default_rng(seed), cond=1e4, density=0.15, m_matrix=True)
    H = amg.setup(A, max_coarse=5)
    for lev in H.levels[:-1]:
        G = amg.strength(lev.A, 0.25)
        _check_splitting(G, lev.splitting)
        assert lev.P.n_cols == int(lev.splitting.sum())
