import json
from pathlib import Path

import numpy as np
import pytest

from combpc import amg
from combpc.combined import CombinedPreconditioner
from combpc.errors import CertificateViolation
from combpc.ilu import ichol
from combpc.operators import (
    DenseOperator, DenseSolveOperator, IdentityOperator, ScaledOperator, ZeroOperator,
)
from combpc.problems import Checkerboard, Lognormal, ProblemSpec, generate, laplacian, random_spd
from combpc.smoothers import Smoother
from combpc.sparse import MAX_DENSE, SparseMatrix
from combpc.spectral import (
    NonExpansiveWarning, assemble_dense_operator, certify_condition_bound, certify_spd,
    estimate_m0_m1, estimate_rho, kappa_bound, lanczos_extremes, product_eigenvalues,
    scale_for_theorem, symmetrized_spectrum,
)

from oracles import combined_matrix, gen_eigs, gs_matrix, laplacian_1d, symmetrized

GOLDEN = json.loads((Path(__file__).parent / "data" / "golden_certificates.json").read_text())


def _diag(*v):
    return SparseMatrix.from_dense(np.diag(np.array(v, dtype=float)))


def test_assemble_trivial_operators():
    np.testing.assert_array_equal(assemble_dense_operator(IdentityOperator(4)), np.eye(4))
    np.testing.assert_array_equal(assemble_dense_operator(ichol(_diag(4.0))), [[0.25]])
    with pytest.raises(ValueError):
        assemble_dense_operator(IdentityOperator(MAX_DENSE + 1))


def test_assembled_combination_matches_dense_formula(rng):
    A = random_spd(16, rng, cond=1e3, density=0.3, m_matrix=True)
    C = CombinedPreconditioner(A, Smoother(A), ichol(A))
    Ad = A.to_dense()
    ref = combined_matrix(gs_matrix(Ad), assemble_dense_operator(ichol(A)), Ad)
    np.testing.assert_allclose(assemble_dense_operator(C), ref, atol=1e-12 * np.abs(ref).max())


def test_rho_trivial_cases():
    A = laplacian(6)
    assert estimate_rho(DenseSolveOperator(A), A) == pytest.approx(0.0, abs=1e-14)
    assert estimate_rho(ZeroOperator(6), A) == pytest.approx(1.0, abs=1e-14)


def test_rho_of_gs_matches_dense_oracle():
    A = laplacian(8)
    Ad = laplacian_1d(8)
    rho = estimate_rho(Smoother(A), A)
    lam = gen_eigs(symmetrized(gs_matrix(Ad), Ad), Ad)
    assert 0 < rho < 1
    assert rho == pytest.approx(1 - lam[0], abs=1e-10)


def test_rho_lanczos_path_agrees_with_dense():
    A = generate(ProblemSpec(cells=(10, 10), field=Lognormal(4, 1.0))).A
    H = amg.setup(A, max_coarse=10)
    assert estimate_rho(H, A, "lanczos") == pytest.approx(estimate_rho(H, A), abs=1e-8)
    B = ichol(A)
    lo, hi = estimate_m0_m1(B, A, "lanczos")
    dlo, dhi = estimate_m0_m1(B, A)
    assert lo == pytest.approx(dlo, rel=1e-8) and hi == pytest.approx(dhi, rel=1e-8)


def test_expansive_smoother_warns():
    A = laplacian(5)
    with pytest.warns(NonExpansiveWarning):
        rho = estimate_rho(ScaledOperator(Smoother(A, "jacobi"), 3.0), A)
    assert rho > 1


def test_symmetrized_spectrum_has_unit_top_for_gs():
    A = generate(ProblemSpec(cells=(9, 9), field=Checkerboard(1, 1e6, 3))).A
    lo, hi = symmetrized_spectrum(Smoother(A), A)
    assert hi == pytest.approx(1.0, abs=1e-12)
    assert lo == pytest.approx(1 - estimate_rho(Smoother(A), A), abs=1e-15)


def test_m0_m1_trivial_and_oracle():
    A = laplacian(5)
    assert estimate_m0_m1(DenseSolveOperator(A), A) == pytest.approx((1.0, 1.0), abs=1e-12)
    assert estimate_m0_m1(IdentityOperator(2), _diag(1.0, 2.0)) == pytest.approx((1.0, 2.0))
    A = laplacian(8, 8)
    B = ichol(A)
    lam = gen_eigs(assemble_dense_operator(B), A.to_dense())
    m0, m1 = estimate_m0_m1(B, A)
    assert m0 == pytest.approx(lam[0], abs=1e-10) and m1 == pytest.approx(lam[-1], abs=1e-10)


def test_product_eigenvalues_rejects_nonsymmetric():
    A = laplacian(6)
    with pytest.raises(ValueError):
        product_eigenvalues(Smoother(A), A)


def test_scaling():
    A = laplacian(5)
    assert not scale_for_theorem(DenseSolveOperator(A), A).applicable
    sc = scale_for_theorem(IdentityOperator(2), _diag(1.0, 4.0))
    assert sc.sigma == pytest.approx(1.0) and sc.m1 == pytest.approx(4.0) and sc.applicable
    A = laplacian(8, 8)
    sc = scale_for_theorem(ichol(A), A)
    m0, m1 = estimate_m0_m1(sc.operator, A)
    assert m0 == pytest.approx(1.0, abs=1e-10)
    assert m1 == pytest.approx(sc.m1, rel=1e-10)


def test_kappa_bound_formula():
    assert kappa_bound(0.0, 1.0, 7.0) == 1.0
    assert kappa_bound(1.0, 1.0, 7.0) == 7.0
    # monotone in rho between 1 and m1/m0
    vals = [kappa_bound(r, 1.0, 50.0) for r in np.linspace(0, 1, 11)]
    assert np.all(np.diff(vals) > 0)


def test_exact_smoother_certificate():
    A = laplacian(6, 6)
    cert = certify_condition_bound(DenseSolveOperator(A), ichol(A), A)
    assert cert.rho == pytest.approx(0.0, abs=1e-12)
    assert cert.kappa_bound == pytest.approx(1.0, abs=1e-10)
    assert cert.kappa_combined == pytest.approx(1.0, abs=1e-10)


def test_exact_preconditioner_is_not_applicable():
    A = laplacian(6)
    cert = certify_condition_bound(Smoother(A), DenseSolveOperator(A), A)
    assert not cert.applicable
    assert cert.checks == {"bound": None, "better_B": None, "better_S": None}
    assert cert.passed


def test_strict_mode_raises_on_violation(monkeypatch):
    import combpc.spectral as spectral

    A = laplacian(6, 6)
    S, B = Smoother(A), ichol(A)
    assert certify_condition_bound(S, B, A).passed
    # the inequality holds for every valid input, so fake a bound that is too tight
    monkeypatch.setattr(spectral, "kappa_bound", lambda rho, m0, m1: 1.0)
    cert = certify_condition_bound(S, B, A, strict=False)
    assert cert.checks["bound"] is False and not cert.passed
    with pytest.raises(CertificateViolation):
        certify_condition_bound(S, B, A)


@pytest.mark.parametrize("key", sorted(GOLDEN["checkerboard_12x12"]))
def test_golden_checkerboard_certificates(key):
    name, contrast = key.split(":")
    A = generate(ProblemSpec(cells=(12, 12), field=Checkerboard(1, float(contrast), 4))).A
    S = Smoother(A) if name == "gs" else amg.setup(A, max_coarse=10)
    cert = certify_condition_bound(S, ichol(A), A)
    assert cert.applicable and cert.passed
    golden = GOLDEN["checkerboard_12x12"][key]
    rtol = max(1e-9, 1e-13 * golden["kappa_B"])
    for field, value in golden.items():
        assert getattr(cert, field) == pytest.approx(value, rel=rtol), field


def test_ic_level_regression():
    A = laplacian(8, 8)
    kappas = [np.divide(*estimate_m0_m1(ichol(A, k), A)[::-1]) for k in range(4)]
    np.testing.assert_allclose(kappas, GOLDEN["laplacian_8x8_kappa_ic_by_level"], rtol=1e-10)
    assert np.all(np.diff(kappas) < 0)


def test_certify_spd():
    assert certify_spd(IdentityOperator(5))
    assert not certify_spd(DenseOperator(-np.eye(3)))
    assert not certify_spd(np.array([[1.0, 1e-3], [0.0, 1.0]]))
    A = laplacian(5, 5)
    assert certify_spd(CombinedPreconditioner(A, Smoother(A), ichol(A)))


def test_lanczos_extremes_of_laplacian():
    A = laplacian(40)
    lo, hi = lanczos_extremes(lambda v: v, A, 40)
    assert lo == pytest.approx(1.0) and hi == pytest.approx(1.0)
    Ad = A.to_dense()
    lo, hi = lanczos_extremes(lambda v: np.linalg.solve(Ad, np.diag(Ad) * v), A, 40)
    lam = np.linalg.eigvalsh(Ad / 2)
    assert 1 / lo == pytest.approx(lam[-1], rel=1e-8) and 1 / hi == pytest.approx(lam[0], rel=1e-8)


def test_certificate_serializes():
    A = laplacian(5, 5)
    d = certify_condition_bound(Smoother(A), ichol(A), A).to_dict()
    json.dumps(d)
    assert {"rho", "m0", "m1", "kappa_B", "kappa_S", "kappa_combined", "kappa_bound",
            "scaled", "sigma", "checks"} <= set(d)
