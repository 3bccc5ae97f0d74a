"""Dense reference implementations used only by the tests.

Each oracle is written from the defining formula, independently of the
package's sparse code paths.
"""

import numpy as np


def dense_fill_levels(A, k):
    """Level-of-fill matrix (np.inf = not kept) by dense IKJ elimination."""
    A = np.asarray(A)
    n = A.shape[0]
    lev = np.where((A != 0) | np.eye(n, dtype=bool), 0.0, np.inf)
    for i in range(n):
        for p in range(i):
            if lev[i, p] > k:
                continue
            for j in range(p + 1, n):
                lev[i, j] = min(lev[i, j], lev[i, p] + lev[p, j] + 1)
        lev[i, lev[i] > k] = np.inf
    return lev


def dense_ilu(A, keep):
    """Unit lower L and upper U from IKJ elimination restricted to ``keep``."""
    W = np.array(A, dtype=float)
    n = W.shape[0]
    for i in range(n):
        for p in range(i):
            if not keep[i, p]:
                continue
            W[i, p] /= W[p, p]
            for j in range(p + 1, n):
                if keep[i, j]:
                    W[i, j] -= W[i, p] * W[p, j]
    W[~keep] = 0.0
    L = np.tril(W, -1) + np.eye(n)
    U = np.triu(W)
    return L, U


def dense_ic(A, keep):
    """IC factor obtained from the restricted LU of a symmetric pattern."""
    L, U = dense_ilu(A, keep)
    return L * np.sqrt(np.diag(U))[None, :]


def gs_matrix(A, kind="gs-forward"):
    A = np.asarray(A, dtype=float)
    Lo, Up = np.tril(A), np.triu(A)
    if kind == "gs-forward":
        return np.linalg.inv(Lo)
    if kind == "gs-backward":
        return np.linalg.inv(Up)
    if kind == "gs-symmetric":
        Fi, Bi = np.linalg.inv(Lo), np.linalg.inv(Up)
        return Fi + Bi - Bi @ A @ Fi
    if kind == "jacobi":
        return np.diag(1.0 / np.diag(A))
    raise ValueError(kind)


def symmetrized(S, A):
    return S + S.T - S.T @ A @ S


def combined_matrix(S, B, A):
    """Expanded form of the multiplicative combination."""
    n = A.shape[0]
    I = np.eye(n)
    return symmetrized(S, A) + (I - S.T @ A) @ B @ (I - A @ S)


def vcycle_matrix(levels):
    """Dense V-cycle operator from a list of (A, P, S) tuples, finest first.

    The last entry has ``P = S = None`` and is solved exactly.
    """
    A, P, S = levels[0]
    if P is None:
        return np.linalg.inv(A)
    Bc = vcycle_matrix(levels[1:])
    I = np.eye(A.shape[0])
    return symmetrized(S, A) + (I - S.T @ A) @ P @ Bc @ P.T @ (I - A @ S)


def gen_eigs(M, A):
    """Eigenvalues of M A via the symmetric-definite pencil (M^-1 not needed)."""
    lam = np.linalg.eigvals(np.asarray(M) @ np.asarray(A))
    return np.sort(lam.real)


def laplacian_1d(n):
    return 2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
