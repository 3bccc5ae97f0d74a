"""Preconditioned conjugate gradients.

Convergence is judged on the recomputed residual ``||f - A x_k|| /
||f - A x_0||``.  The step lengths ``alpha_k`` and ``beta_k`` of the
recurrence define the Lanczos tridiagonal of the preconditioned operator,
whose extreme eigenvalues give cheap spectral estimates of ``M A``.
"""

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import DimensionError, IndefiniteError
from .operators import IdentityOperator
from .sparse import as_vector

__all__ = ["SolveConfig", "SolveReport", "pcg", "lanczos_tridiagonal", "stationary"]

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class SolveConfig:
    rel_tol: float = 1e-10
    max_iters: int = 10000
    record_history: bool = True

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    residual_history: list = field(default_factory=list)
    setup_seconds: float = 0.0
    solve_seconds: float = 0.0
    eig_min_est: float | None = None
    eig_max_est: float | None = None
    cond_est: float | None = None

    @property
    def final_residual(self):
        return self.residual_history[-1] if self.residual_history else None

    def to_dict(self):
        d = asdict(self)
        for key in ("eig_min_est", "eig_max_est", "cond_est"):
            if d[key] is not None and not math.isfinite(d[key]):
                d[key] = None
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def lanczos_tridiagonal(alphas, betas):
    """Diagonal and off-diagonal of the Lanczos matrix built from CG steps.

    With ``k`` step lengths ``alphas`` and the ``k - 1`` ratios ``betas``
    that followed them:

        T[0, 0] = 1/alpha_0
        T[j, j] = 1/alpha_j + beta_{j-1}/alpha_{j-1}
        T[j, j-1] = sqrt(beta_{j-1}) / alpha_{j-1}
    """
    a = np.asarray(alphas, dtype=np.float64)
    b = np.asarray(betas, dtype=np.float64)[: max(a.size - 1, 0)]
    d = 1.0 / a
    d[1:] += b / a[:-1]
    e = np.sqrt(b) / a[:-1]
    return d, e


def _estimates(alphas, betas):
    if not alphas:
        return None, None, None
    d, e = lanczos_tridiagonal(alphas, betas)
    if d.size == 1:
        ev = d
    else:
        ev = eigvalsh_tridiagonal(d, e)
    lo, hi = float(ev.min()), float(ev.max())
    cond = hi / lo if lo > 0 else math.inf
    return lo, hi, cond


def pcg(A, f, M=None, cfg=None, x0=None, callback=None, setup_seconds=0.0):
    """Solve ``A x = f`` with preconditioner ``M``.

    Parameters
    ----------
    A : SparseMatrix
        Symmetric positive definite.
    f : array_like
    M : LinearOperator, optional
        Must declare ``symmetric = True``.  Identity when omitted.
    cfg : SolveConfig, optional
    x0 : array_like, optional
        Initial guess, zero by default.
    callback : callable, optional
        Called as ``callback(k, rel_residual, x)`` after each iteration.

    Returns
    -------
    x : ndarray
    report : SolveReport

    Raises
    ------
    IndefiniteError
        If ``(p, A p) <= 0`` or ``(r, M r) <= 0`` for a nonzero residual.
        With an SPD system this exposes a preconditioner that is not
        positive definite.
    """
    cfg = cfg or SolveConfig()
    n = A.n_rows
    if A.n_cols != n:
        raise DimensionError("PCG needs a square matrix")
    if not A.symmetric:
        raise ValueError("PCG needs a matrix flagged symmetric")
    f = as_vector(f, n, "right-hand side")
    M = M if M is not None else IdentityOperator(n)
    if M.n != n:
        raise DimensionError(f"preconditioner size {M.n} does not match {n}")
    if not getattr(M, "symmetric", False):
        raise ValueError(f"preconditioner {type(M).__name__} is not declared self-adjoint")

    t0 = time.perf_counter()
    x = np.zeros(n) if x0 is None else as_vector(x0, n, "x0").copy()
    r = f - A @ x
    r0 = float(np.linalg.norm(r))
    history = [1.0]
    alphas, betas = [], []
    converged = r0 == 0.0
    k = 0
    if not converged:
        z = M.apply(r)
        rz = float(r @ z)
        if not rz > 0.0:
            raise IndefiniteError(f"indefiniteness detected at iteration 0: (r, Mr) = {rz:.3e}", 0)
        p = z.copy()
        for k in range(1, cfg.max_iters + 1):
            Ap = A @ p
            pAp = float(p @ Ap)
            if not pAp > 0.0:
                raise IndefiniteError(
                    f"indefiniteness detected at iteration {k}: (p, Ap) = {pAp:.3e}", k
                )
            alpha = rz / pAp
            alphas.append(alpha)
            x += alpha * p
            r -= alpha * Ap
            true_norm = float(np.linalg.norm(f - A @ x))
            rel = true_norm / r0
            history.append(rel)
            if callback is not None:
                callback(k, rel, x)
            if rel <= cfg.rel_tol:
                converged = True
                break
            if float(np.linalg.norm(r)) <= _EPS * true_norm:
                # recursive residual far below the attainable accuracy
                break
            z = M.apply(r)
            rz_new = float(r @ z)
            if not rz_new > 0.0:
                raise IndefiniteError(
                    f"indefiniteness detected at iteration {k}: (r, Mr) = {rz_new:.3e}", k
                )
            beta = rz_new / rz
            betas.append(beta)
            p = z + beta * p
            rz = rz_new
    lo, hi, cond = _estimates(alphas, betas)
    report = SolveReport(
        converged=bool(converged),
        iterations=int(k),
        residual_history=history if cfg.record_history else history[-1:],
        setup_seconds=float(setup_seconds),
        solve_seconds=time.perf_counter() - t0,
        eig_min_est=lo,
        eig_max_est=hi,
        cond_est=cond,
    )
    return x, report


def stationary(A, f, M, cfg=None, x0=None, divergence=1e8):
    """Simple iteration ``x <- x + M (f - A x)``.

    Stops on convergence, on ``max_iters`` or once the relative residual
    exceeds ``divergence``.
    """
    cfg = cfg or SolveConfig()
    n = A.n_rows
    f = as_vector(f, n, "right-hand side")
    x = np.zeros(n) if x0 is None else as_vector(x0, n, "x0").copy()
    t0 = time.perf_counter()
    r0 = float(np.linalg.norm(f - A @ x))
    history = [1.0]
    converged = r0 == 0.0
    k = 0
    while not converged and k < cfg.max_iters:
        k += 1
        x = x + M.apply(f - A @ x)
        rel = float(np.linalg.norm(f - A @ x)) / r0
        history.append(rel)
        if rel <= cfg.rel_tol:
            converged = True
        elif not rel < divergence:
            break
    report = SolveReport(
        converged=converged,
        iterations=k,
        residual_history=history if cfg.record_history else history[-1:],
        solve_seconds=time.perf_counter() - t0,
    )
    return x, report
