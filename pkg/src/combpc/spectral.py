"""Spectral certificates for smoothers and preconditioners.

Everything here is a brute-force check meant for desk-sized problems.
Operators are assembled densely column by column; eigenvalues of products
``M A`` with symmetric ``M`` and SPD ``A`` are obtained through the
congruence ``L^T M L`` with ``A = L L^T``, which is symmetric and similar to
``M A``.

The central quantities, for a smoother ``S`` and an SPD preconditioner
``B``:

* ``rho = ||I - S A||_A^2 = 1 - lambda_min(S~ A)``, computed from the
  singular values of ``L^T (I - S A) L^{-T}``;
* ``m0``, ``m1``: extreme eigenvalues of ``B A``;
* the condition-number bound for the multiplicative combination (with
  ``B`` scaled so ``m1 > 1 >= m0``),

      kappa(B_co A) <= ((1 - m1)(1 - rho) + m1) / ((1 - m0)(1 - rho) + m0),

  together with ``kappa(B_co A) < kappa(B A)`` and, when
  ``rho >= 1 - m0 / (m1 - 1)``, ``kappa(B_co A) <= kappa(S~ A) = 1/(1 - rho)``.
"""

import warnings
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .combined import CombinedPreconditioner, Mode
from .errors import CertificateViolation
from .operators import LinearOperator, ScaledOperator
from .smoothers import symmetrized_apply
from .sparse import check_dense_size

__all__ = [
    "SYMMETRY_TOL",
    "BOUND_SLACK",
    "NonExpansiveWarning",
    "SymmetrizedOperator",
    "assemble_dense_operator",
    "product_eigenvalues",
    "condition_number",
    "estimate_rho",
    "smoother_singular_values",
    "symmetrized_spectrum",
    "kappa_bound",
    "estimate_m0_m1",
    "scale_for_theorem",
    "ScaledPreconditioner",
    "SpectralCertificate",
    "certify_condition_bound",
    "certify_spd",
    "spd_margin",
    "lanczos_extremes",
    "WrongOrderWitness",
    "find_wrong_order_witness",
]

SYMMETRY_TOL = 1e-10
BOUND_SLACK = 1e-8
#: m0 may exceed 1 by this much after scaling and still count as m0 <= 1.
SCALING_TOL = 1e-10
#: sanity bound on the asymmetry of assembled operators fed to eigensolvers
ASSEMBLY_SYMMETRY_TOL = 1e-6


class NonExpansiveWarning(RuntimeWarning):
    """The smoother's error propagation expands the A-norm."""


class SymmetrizedOperator(LinearOperator):
    """``S + S^T - S^T A S`` as an operator."""

    def __init__(self, S, A):
        self.S, self.A = S, A
        self.n = S.n
        self.symmetric = A.symmetric

    def apply(self, r):
        return symmetrized_apply(self.S, self.A, self._check(r))


def assemble_dense_operator(op, n=None):
    """Matrix whose column ``j`` is ``op(e_j)``."""
    n = op.n if n is None else int(n)
    check_dense_size(n)
    out = np.empty((n, n))
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        out[:, j] = op.apply(e)
        e[j] = 0.0
    return out


def _dense(A):
    return A.to_dense() if hasattr(A, "to_dense") else np.asarray(A, dtype=np.float64)


def _symmetric_part(M, what, tol):
    scale = np.abs(M).max()
    asym = np.abs(M - M.T).max()
    if asym > tol * max(scale, np.finfo(float).tiny):
        raise ValueError(f"{what} is not symmetric: asymmetry {asym:.3e}, scale {scale:.3e}")
    return 0.5 * (M + M.T)


def product_eigenvalues(M, A, what="operator", sym_tol=ASSEMBLY_SYMMETRY_TOL):
    """Ascending eigenvalues of ``M A`` for symmetric ``M`` and SPD ``A``.

    ``M`` may be a dense array or an operator; ``A`` a SparseMatrix or array.
    The assembled ``M`` is symmetrized after checking its entrywise
    asymmetry against ``sym_tol`` relative to its largest entry; the default
    only guards against operators that are not symmetric at all, since
    rounding in matrix-free products of high-contrast problems can reach
    about ``1e-9``.
    """
    Md = assemble_dense_operator(M) if isinstance(M, LinearOperator) else np.asarray(M, float)
    Md = _symmetric_part(Md, what, sym_tol)
    L = sla.cholesky(_dense(A), lower=True)
    C = L.T @ Md @ L
    return sla.eigvalsh(0.5 * (C + C.T))


def condition_number(M, A):
    lam = product_eigenvalues(M, A)
    return float(lam[-1] / lam[0]) if lam[0] > 0 else np.inf


def lanczos_extremes(apply_op, A, n, steps=None, rng=None):
    """Ritz extremes of an operator self-adjoint in the A-inner product.

    Lanczos with full reorthogonalization in ``(x, y)_A = x^T A y``; used
    when dense assembly is too large.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    m = min(n, 300 if steps is None else int(steps))
    V = np.zeros((m + 1, n))
    AV = np.zeros((m + 1, n))
    alpha, beta = np.zeros(m), np.zeros(m)
    v = rng.standard_normal(n)
    Av = A @ v
    nv = np.sqrt(v @ Av)
    V[0], AV[0] = v / nv, Av / nv
    k = m
    for j in range(m):
        w = apply_op(V[j])
        alpha[j] = AV[j] @ w
        # full reorthogonalization against all previous vectors, twice
        for _ in range(2):
            w -= V[: j + 1].T @ (AV[: j + 1] @ w)
        Aw = A @ w
        b = np.sqrt(max(w @ Aw, 0.0))
        if j + 1 == m or b < 1e-12 * max(abs(alpha[j]), 1.0):
            k = j + 1
            break
        beta[j] = b
        V[j + 1], AV[j + 1] = w / b, Aw / b
    ev = sla.eigvalsh_tridiagonal(alpha[:k], beta[: k - 1]) if k > 1 else alpha[:1]
    return float(ev[0]), float(ev[-1])


def smoother_singular_values(S, A):
    """Singular values (descending) of ``L^T (I - S A) L^{-T}``, ``A = L L^T``.

    Their squares are the eigenvalues of ``I - S~ A`` because
    ``I - S~ A = (I - S^T A)(I - S A)``; working with ``S`` directly avoids
    the cancellation in assembling ``S~``.
    """
    Sd = assemble_dense_operator(S) if isinstance(S, LinearOperator) else np.asarray(S, float)
    L = sla.cholesky(_dense(A), lower=True)
    E = np.eye(L.shape[0]) - L.T @ Sd @ L
    return sla.svdvals(E)


def _one_minus_square(s):
    return (1.0 - s) * (1.0 + s)


def estimate_rho(S, A, method="dense"):
    """Squared A-norm of ``I - S A``, i.e. ``1 - lambda_min(S~ A)``.

    Emits :class:`NonExpansiveWarning` when the result exceeds ``1 + 1e-10``.
    """
    if method == "dense":
        rho = float(smoother_singular_values(S, A)[0] ** 2)
    elif method == "lanczos":
        St = SymmetrizedOperator(S, A)
        lam_min, _ = lanczos_extremes(lambda v: St.apply(A @ v), A, A.n_rows)
        rho = 1.0 - float(lam_min)
    else:
        raise ValueError(f"unknown method {method!r}")
    if rho > 1.0 + 1e-10:
        warnings.warn(f"smoother is expansive in the A-norm: rho = {rho:.6g}", NonExpansiveWarning)
    return rho


def symmetrized_spectrum(S, A):
    """(lambda_min, lambda_max) of ``S~ A`` from the singular values above."""
    sv = smoother_singular_values(S, A)
    return float(_one_minus_square(sv[0])), float(_one_minus_square(sv[-1]))


def estimate_m0_m1(B, A, method="dense"):
    """(lambda_min, lambda_max) of ``B A``."""
    if method == "dense":
        lam = product_eigenvalues(B, A, "preconditioner")
        return float(lam[0]), float(lam[-1])
    if method == "lanczos":
        return lanczos_extremes(lambda v: B.apply(A @ v), A, A.n_rows)
    raise ValueError(f"unknown method {method!r}")


class ScaledPreconditioner(NamedTuple):
    operator: LinearOperator
    sigma: float
    m0: float
    m1: float
    applicable: bool


def scale_for_theorem(B, A, method="dense"):
    """Scale ``B`` by ``sigma = 1/m0`` so that ``m0 = 1`` and ``m1 = kappa(B A)``.

    ``applicable`` is False when ``kappa(B A)`` is 1 to rounding, in which
    case the strict requirement ``m1 > 1`` cannot be met by any scaling.
    """
    m0, m1 = estimate_m0_m1(B, A, method)
    if not m0 > 0:
        raise ValueError(f"B A has a nonpositive eigenvalue {m0:.3e}; B is not SPD")
    sigma = 1.0 / m0
    kappa = m1 / m0
    return ScaledPreconditioner(ScaledOperator(B, sigma), sigma, 1.0, kappa, kappa > 1.0 + SCALING_TOL)


def kappa_bound(rho, m0, m1):
    """Upper bound on kappa(B_co A) from rho, m0, m1."""
    return ((1.0 - m1) * (1.0 - rho) + m1) / ((1.0 - m0) * (1.0 - rho) + m0)


@dataclass
class SpectralCertificate:
    rho: float
    m0: float
    m1: float
    kappa_B: float
    kappa_S: float
    kappa_combined: float
    kappa_bound: float | None
    scaled: bool
    sigma: float
    rho_threshold: float | None = None
    applicable: bool = True
    checks: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(v is not False for v in self.checks.values())

    def to_dict(self):
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, float) and not np.isfinite(v):
                d[k] = None
        return d


def certify_condition_bound(S, B, A, scale=True, strict=True):
    """Dense check of the condition-number comparison for ``B_co``.

    Parameters
    ----------
    S : smoother operator (must be norm-convergent, ``rho < 1``)
    B : SPD preconditioner
    A : SPD SparseMatrix
    scale : bool
        Rescale ``B`` by ``1/m0`` first (the comparison assumes
        ``m1 > 1 >= m0``).
    strict : bool
        Raise :class:`CertificateViolation` if an applicable inequality fails.

    Checks recorded in ``certificate.checks`` (``None`` = hypothesis not met):

    ``bound``      kappa(B_co A) <= kappa_bound + 1e-8
    ``better_B``   kappa(B_co A) < kappa(B A)   (needs m1 > 1 >= m0)
    ``better_S``   kappa(B_co A) <= 1/(1 - rho) + 1e-8   (needs rho >= 1 - m0/(m1 - 1))
    """
    sv = smoother_singular_values(S, A)
    rho = float(sv[0] ** 2)
    if rho > 1.0 + 1e-10:
        warnings.warn(f"smoother is expansive in the A-norm: rho = {rho:.6g}", NonExpansiveWarning)
    lo, hi = _one_minus_square(sv[0]), _one_minus_square(sv[-1])
    kappa_S = float(hi / lo) if lo > 0 else np.inf
    if scale:
        # m0 = 1 by construction; re-measuring would only add rounding of
        # relative size eps * kappa, enough to spoil m0 <= 1 at high contrast
        sc = scale_for_theorem(B, A)
        Bs, sigma, m0, m1 = sc.operator, sc.sigma, 1.0, sc.m1
    else:
        Bs, sigma = B, 1.0
        m0, m1 = estimate_m0_m1(B, A)
    kappa_B = m1 / m0
    Bco = CombinedPreconditioner(A, S, Bs)
    kappa_c = condition_number(Bco, A)

    norm_convergent = rho < 1.0
    ordered = m1 > 1.0 + SCALING_TOL and m0 <= 1.0 + SCALING_TOL and m0 > 0
    applicable = norm_convergent and ordered
    checks = {"bound": None, "better_B": None, "better_S": None}
    bound = threshold = None
    if applicable:
        bound = kappa_bound(rho, m0, m1)
        threshold = 1.0 - m0 / (m1 - 1.0)
        checks["bound"] = bool(kappa_c <= bound + BOUND_SLACK)
        checks["better_B"] = bool(kappa_c < kappa_B)
        if rho >= threshold:
            checks["better_S"] = bool(kappa_c <= 1.0 / (1.0 - rho) + BOUND_SLACK)
    cert = SpectralCertificate(
        rho=rho,
        m0=m0,
        m1=m1,
        kappa_B=kappa_B,
        kappa_S=kappa_S,
        kappa_combined=kappa_c,
        kappa_bound=bound,
        scaled=bool(scale),
        sigma=sigma,
        rho_threshold=threshold,
        applicable=applicable,
        checks=checks,
    )
    if strict and not cert.passed:
        failed = [k for k, v in checks.items() if v is False]
        raise CertificateViolation(f"condition-number certificate failed: {failed}; {cert}")
    return cert


def spd_margin(op, n=None):
    """(relative asymmetry, smallest eigenvalue of the symmetric part)."""
    M = assemble_dense_operator(op, n) if isinstance(op, LinearOperator) else np.asarray(op, float)
    scale = max(np.abs(M).max(), np.finfo(float).tiny)
    asym = float(np.abs(M - M.T).max() / scale)
    lam_min = float(sla.eigvalsh(0.5 * (M + M.T))[0])
    return asym, lam_min


def certify_spd(op, n=None):
    """True when the dense assembly is symmetric to 1e-10 relative and
    its smallest eigenvalue is positive."""
    asym, lam_min = spd_margin(op, n)
    return asym <= SYMMETRY_TOL and lam_min > 0.0


class WrongOrderWitness(NamedTuple):
    sigma: float
    lam_min: float
    asymmetry: float


def find_wrong_order_witness(A, S, B, sigmas=(2.0, 4.0, 8.0, 16.0)):
    """Search ``sigma * B`` for a wrong-order combination that is not SPD.

    For each ``sigma`` in turn the operator with error propagation
    ``(I - sigma B A)(I - S~ A)(I - sigma B A)`` is assembled densely.  The
    first one that is symmetric to the certification tolerance but has a
    negative eigenvalue is returned; ``None`` means the search was
    inconclusive.
    """
    for sigma in sigmas:
        op = CombinedPreconditioner(A, S, ScaledOperator(B, sigma), Mode.WRONG_ORDER)
        asym, lam_min = spd_margin(op, A.n_rows)
        if asym <= SYMMETRY_TOL and lam_min < 0.0:
            return WrongOrderWitness(float(sigma), lam_min, asym)
    return None
