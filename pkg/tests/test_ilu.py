import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combpc.errors import BreakdownError, FactorizationError
from combpc.ilu import fill_magnitude_by_level, ichol, ilu, numeric_factor, symbolic_factor
from combpc.problems import laplacian, random_spd
from combpc.sparse import SparseMatrix
from combpc.spectral import assemble_dense_operator

from oracles import dense_fill_levels, dense_ic, dense_ilu, laplacian_1d


def _random_pattern_matrix(rng, n, density=0.25):
    M = rng.standard_normal((n, n)) * (rng.random((n, n)) < density)
    M[np.diag_indices(n)] = np.abs(M).sum(axis=1) + 1.0
    return M


def _oracle_levels(pattern):
    lev = np.full((pattern.n, pattern.n), np.inf)
    for (i, j), l in pattern.level_dict().items():
        lev[i, j] = l
    return lev


def test_laplacian_2d_level_one_fill():
    A = laplacian(3, 3)
    p0, p1 = symbolic_factor(A, 0), symbolic_factor(A, 1)
    assert p0.positions() == set(zip(*np.nonzero(A.to_dense())))
    d = p1.level_dict()
    # node 1 couples to 3 through 0
    assert d[(3, 1)] == 1 and d[(1, 3)] == 1
    assert max(d.values()) == 1


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_levels_match_dense_oracle(k, rng):
    for _ in range(5):
        M = _random_pattern_matrix(rng, 15)
        pattern = symbolic_factor(SparseMatrix.from_dense(M), k)
        np.testing.assert_array_equal(_oracle_levels(pattern), dense_fill_levels(M, k))


@pytest.mark.parametrize("k", [0, 1, 2])
def test_numeric_ilu_matches_dense_oracle(k, rng):
    M = _random_pattern_matrix(rng, 20)
    F = ilu(SparseMatrix.from_dense(M), k)
    keep = np.isfinite(dense_fill_levels(M, k))
    L, U = dense_ilu(M, keep)
    np.testing.assert_allclose(F.L.to_dense() + np.eye(20), L, atol=1e-12)
    np.testing.assert_allclose(F.U.to_dense(), U, atol=1e-12)


def test_full_level_is_exact_lu(rng):
    n = 24
    M = _random_pattern_matrix(rng, n, 0.15)
    F = ilu(SparseMatrix.from_dense(M), n)
    np.testing.assert_allclose(F.product().to_dense(), M, atol=1e-12 * np.abs(M).max())
    np.testing.assert_allclose(assemble_dense_operator(F) @ M, np.eye(n), atol=1e-10)


def test_ilu0_residual_vanishes_on_pattern(rng):
    M = _random_pattern_matrix(rng, 30)
    F = ilu(SparseMatrix.from_dense(M), 0)
    R = F.product().to_dense() - M
    on = (M != 0) | np.eye(30, dtype=bool)
    assert np.abs(R[on]).max() <= 1e-12 * np.abs(M).max()


def test_ic0_of_tridiagonal_is_cholesky():
    A = laplacian(10)
    F = ichol(A, 0)
    np.testing.assert_allclose(F.L.to_dense(), np.linalg.cholesky(laplacian_1d(10)), atol=1e-14)
    np.testing.assert_allclose(np.diag(F.L.to_dense())[:3], np.sqrt([2, 1.5, 4 / 3]), atol=1e-15)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_ic_matches_restricted_lu(k, rng):
    A = random_spd(20, rng, density=0.2, m_matrix=True)
    F = ichol(A, k)
    keep = np.isfinite(dense_fill_levels(A.to_dense(), k))
    np.testing.assert_allclose(F.L.to_dense(), dense_ic(A.to_dense(), keep), atol=1e-10)
    assert F.symmetric
    D = assemble_dense_operator(F)
    np.testing.assert_allclose(D, D.T, atol=1e-12)


def test_transpose_apply(rng):
    M = _random_pattern_matrix(rng, 12)
    F = ilu(SparseMatrix.from_dense(M), 1)
    D = assemble_dense_operator(F)
    Dt = np.column_stack([F.apply_transpose(e) for e in np.eye(12)])
    np.testing.assert_allclose(Dt, D.T, atol=1e-12)


def test_ic_breakdown_names_row():
    M = np.array([[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(BreakdownError) as exc:
        ichol(SparseMatrix.from_dense(M))
    assert exc.value.row == 1
    assert "row 1" in str(exc.value)
    F = ichol(SparseMatrix.from_dense(M), shift=4.0)
    assert F.shift == 4.0


def test_ilu_zero_pivot():
    M = np.array([[0.0, 1.0], [1.0, 1.0]])
    with pytest.raises(FactorizationError) as exc:
        ilu(SparseMatrix.from_dense(M))
    assert exc.value.row == 0


def test_bad_arguments():
    A = laplacian(4)
    with pytest.raises(ValueError):
        symbolic_factor(A, -1)
    with pytest.raises(ValueError):
        numeric_factor(A, symbolic_factor(A, 0), "lu")
    with pytest.raises(ValueError):
        ichol(SparseMatrix.from_dense(np.array([[2.0, 1.0], [0.0, 2.0]])))


def test_fill_magnitude_decays_on_laplacian():
    mags = fill_magnitude_by_level(laplacian(8, 8), 3)
    assert mags[0] == pytest.approx(1.0)
    assert mags[3] < mags[1] < 1.0


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 18), st.integers(0, 4), st.integers(0, 10_000))
def test_pattern_property(n, k, seed):
    M = _random_pattern_matrix(np.random.default_rng(seed), n, 0.3)
    p = symbolic_factor(SparseMatrix.from_dense(M), k)
    lev = dense_fill_levels(M, k)
    assert p.positions() == set(zip(*np.nonzero(np.isfinite(lev))))
    assert p.levels.max() <= k
    assert p.positions() >= set(zip(*np.nonzero(M)))
