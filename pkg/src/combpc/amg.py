"""Classical (Ruge-Stueben) algebraic multigrid.

Setup builds, level by level, a strength graph, a C/F splitting, an
interpolation ``P`` and the Galerkin coarse matrix ``P^T A P`` until the
coarse problem is small enough for a dense Cholesky solve.  Applying the
hierarchy runs V-cycles from a zero initial guess: forward Gauss-Seidel
before the coarse correction, its transpose after it, so the cycle operator
is symmetric.

Splitting arrays use 1 for C-points and 0 for F-points.
"""

import heapq
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SetupError
from .operators import DenseSolveOperator, LinearOperator
from .smoothers import Smoother, SmootherKind
from .sparse import MAX_DENSE, SparseMatrix

__all__ = [
    "StrengthGraph",
    "AmgLevel",
    "AmgHierarchy",
    "strength",
    "split",
    "interpolation",
    "galerkin",
    "setup",
]

COARSE, FINE = 1, 0


@dataclass(frozen=True)
class StrengthGraph:
    """Strong dependencies: ``indices[row_offsets[i]:row_offsets[i+1]]``
    are the points that ``i`` strongly depends on."""

    n: int
    theta: float
    row_offsets: np.ndarray
    col_indices: np.ndarray

    def strong(self, i):
        return self.col_indices[self.row_offsets[i]:self.row_offsets[i + 1]]

    def to_scipy(self):
        data = np.ones(self.col_indices.shape[0])
        return sp.csr_matrix((data, self.col_indices, self.row_offsets), shape=(self.n, self.n))

    def transpose(self):
        """Graph of strong influence: row i lists the points depending on i."""
        t = self.to_scipy().transpose().tocsr()
        t.sort_indices()
        return StrengthGraph(self.n, self.theta, t.indptr.astype(np.int64), t.indices.astype(np.int64))


def _rows(A):
    return np.repeat(np.arange(A.n_rows), np.diff(A.row_offsets))


def _strong_mask(A, theta):
    """Boolean mask over stored entries of A marking strong connections."""
    rows, cols, vals = _rows(A), A.col_indices, A.values
    off = rows != cols
    maxneg = np.zeros(A.n_rows)
    np.maximum.at(maxneg, rows[off], -vals[off])
    m = maxneg[rows]
    return off & (m > 0.0) & (-vals >= theta * m)


def strength(A, theta=0.25):
    """Classical strength of connection.

    ``j`` is strong for ``i`` when ``-a_ij >= theta * max_{k != i}(-a_ik)``;
    rows without negative off-diagonal entries have no strong connections.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    if np.any(A.diagonal() <= 0.0):
        raise ValueError("strength needs a positive diagonal")
    mask = _strong_mask(A, theta)
    rows = _rows(A)
    ptr = np.zeros(A.n_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows[mask], minlength=A.n_rows), out=ptr[1:])
    return StrengthGraph(A.n_rows, float(theta), ptr, A.col_indices[mask].copy())


def split(G):
    """Ruge-Stueben first-pass C/F splitting with a coverage repair.

    Points are taken greedily by the number of undecided points they
    strongly influence (lowest index on ties).  Afterwards any F-point with
    strong dependencies but no strong C-point is promoted to C.
    """
    n = G.n
    S_ptr, S_ind = G.row_offsets.tolist(), G.col_indices.tolist()
    T = G.transpose()
    T_ptr, T_ind = T.row_offsets.tolist(), T.col_indices.tolist()
    UNDECIDED = -1
    state = [UNDECIDED] * n
    lam = [T_ptr[i + 1] - T_ptr[i] for i in range(n)]
    heap = [(-lam[i], i) for i in range(n)]
    heapq.heapify(heap)
    while heap:
        negl, i = heapq.heappop(heap)
        if state[i] != UNDECIDED or -negl != lam[i]:
            continue
        if lam[i] == 0:
            break
        state[i] = COARSE
        for j in T_ind[T_ptr[i]:T_ptr[i + 1]]:
            if state[j] == UNDECIDED:
                state[j] = FINE
                for k in S_ind[S_ptr[j]:S_ptr[j + 1]]:
                    if state[k] == UNDECIDED:
                        lam[k] += 1
                        heapq.heappush(heap, (-lam[k], k))
        for j in S_ind[S_ptr[i]:S_ptr[i + 1]]:
            if state[j] == UNDECIDED:
                lam[j] -= 1
                heapq.heappush(heap, (-lam[j], j))
    for i in range(n):
        if state[i] == UNDECIDED:
            state[i] = FINE
    for i in range(n):
        if state[i] == FINE:
            deps = S_ind[S_ptr[i]:S_ptr[i + 1]]
            if deps and not any(state[j] == COARSE for j in deps):
                state[i] = COARSE
    return np.asarray(state, dtype=np.int8)


def _direct_weights(A, strong_mask, splitting):
    rows, cols, vals = _rows(A), A.col_indices, A.values
    n = A.n_rows
    diag = A.diagonal()
    off = rows != cols
    neg = off & (vals < 0.0)
    sum_neg = np.bincount(rows[neg], weights=vals[neg], minlength=n)
    to_c = strong_mask & (splitting[cols] == COARSE) & (splitting[rows] == FINE)
    sum_c = np.bincount(rows[to_c], weights=vals[to_c], minlength=n)
    fine = splitting == FINE
    has_deps = np.bincount(rows[strong_mask], minlength=n) > 0
    missing = np.flatnonzero(fine & has_deps & (sum_c == 0.0))
    if missing.size:
        raise SetupError(f"F-point {missing[0]} has no strong C-point to interpolate from")
    r, c = rows[to_c], cols[to_c]
    w = -(vals[to_c] / diag[r]) * (sum_neg[r] / sum_c[r])
    return r, c, w


def _classical_weights(A, strong_mask, splitting):
    """Ruge-Stueben interpolation distributing strong F-F couplings."""
    n = A.n_rows
    ptr, ind, val = A.row_offsets, A.col_indices, A.values
    out_r, out_c, out_w = [], [], []
    for i in np.flatnonzero(splitting == FINE):
        lo, hi = ptr[i], ptr[i + 1]
        cols_i, vals_i, strong_i = ind[lo:hi], val[lo:hi], strong_mask[lo:hi]
        Ci = {int(j) for j, s in zip(cols_i, strong_i) if s and splitting[j] == COARSE}
        if not Ci:
            if strong_i.any():
                raise SetupError(f"F-point {i} has no strong C-point to interpolate from")
            continue
        num = {j: 0.0 for j in Ci}
        denom = 0.0
        for j, a, s in zip(cols_i, vals_i, strong_i):
            j = int(j)
            if j == i:
                denom += a
            elif j in Ci:
                num[j] += a
            elif s and splitting[j] == FINE:
                mlo, mhi = ptr[j], ptr[j + 1]
                share = {int(k): b for k, b in zip(ind[mlo:mhi], val[mlo:mhi]) if int(k) in Ci}
                total = sum(share.values())
                if total == 0.0:
                    denom += a
                else:
                    for k, b in share.items():
                        num[k] += a * b / total
            else:
                denom += a
        for j in sorted(Ci):
            out_r.append(i)
            out_c.append(j)
            out_w.append(-num[j] / denom)
    return (
        np.asarray(out_r, dtype=np.int64),
        np.asarray(out_c, dtype=np.int64),
        np.asarray(out_w, dtype=np.float64),
    )


def interpolation(A, G, splitting, method="direct"):
    """Interpolation ``P`` (n_fine x n_coarse).

    C-points are injected.  With ``method="direct"`` an F-point ``i``
    interpolates from its strong C-neighbours ``C_i`` with weights

        w_ij = -(a_ij / a_ii) * sum_{k != i, a_ik < 0} a_ik / sum_{k in C_i} a_ik

    so rows of ``P`` sum to one when ``A`` has zero row sums and nonpositive
    off-diagonals.  ``method="classical"`` additionally distributes strong
    F-F couplings through the common C-points.
    """
    splitting = np.asarray(splitting, dtype=np.int8)
    n = A.n_rows
    coarse = np.flatnonzero(splitting == COARSE)
    cmap = np.full(n, -1, dtype=np.int64)
    cmap[coarse] = np.arange(coarse.size)
    mask = np.zeros(A.nnz, dtype=bool)
    if G.col_indices.size:
        # strong entries of G are a subset of A's stored pattern
        Gs = G.to_scipy()
        Gs.data[:] = 2.0
        ones = sp.csr_matrix((np.ones(A.nnz), A.col_indices, A.row_offsets), shape=A.shape)
        marker = (ones + Gs).tocsr()
        marker.sort_indices()
        if marker.nnz != A.nnz:
            raise SetupError("strength graph is not contained in the matrix pattern")
        mask = marker.data > 2.5
    if method == "direct":
        r, c, w = _direct_weights(A, mask, splitting)
    elif method == "classical":
        r, c, w = _classical_weights(A, mask, splitting)
    else:
        raise ValueError(f"unknown interpolation {method!r}")
    rows = np.concatenate([coarse, r])
    cols = np.concatenate([cmap[coarse], cmap[c]])
    vals = np.concatenate([np.ones(coarse.size), w])
    return SparseMatrix.from_coo(rows, cols, vals, (n, coarse.size))


def galerkin(A, P, tol=1e-10):
    """``P^T A P``, checked for symmetry and flagged symmetric.

    Raises :class:`SetupError` if the computed product is asymmetric beyond
    ``tol`` relative to its largest entry; smaller rounding is removed by
    averaging with the transpose.
    """
    Ps = P.to_scipy()
    Ac = (Ps.transpose().tocsr() @ A.to_scipy() @ Ps).tocsr()
    scale = abs(Ac).max() if Ac.nnz else 0.0
    d = Ac - Ac.transpose()
    asym = abs(d).max() if d.nnz else 0.0
    if asym > tol * max(scale, np.finfo(float).tiny):
        raise SetupError(f"Galerkin product asymmetric: {asym:.3e} vs scale {scale:.3e}")
    return SparseMatrix.from_scipy(Ac).symmetrized()


@dataclass
class AmgLevel:
    A: SparseMatrix
    P: SparseMatrix | None = None
    smoother: LinearOperator | None = None
    splitting: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self._R = None if self.P is None else self.P.to_scipy().transpose().tocsr()


class _SparseCoarseSolver(LinearOperator):
    symmetric = True

    def __init__(self, A):
        self.n = A.n_rows
        self._solve = spla.factorized(A.to_scipy().tocsc())

    def apply(self, r):
        return self._solve(self._check(r))


class AmgHierarchy(LinearOperator):
    """Stack of AMG levels, finest first, usable as a preconditioner.

    ``apply`` runs ``cycles`` V-cycles: ``x = 0; x += V(f - A x)``.
    """

    symmetric = True

    def __init__(self, levels, coarse_solver, cycles=1, params=None):
        if int(cycles) < 1:
            raise ValueError("cycles must be >= 1")
        self.levels = levels
        self.coarse_solver = coarse_solver
        self.cycles = int(cycles)
        self.params = dict(params or {})
        self.A = levels[0].A
        self.n = self.A.n_rows
        self.symmetric = all(
            lev.smoother is None or lev.A.symmetric for lev in levels
        )

    @property
    def num_levels(self):
        return len(self.levels)

    def operator_complexity(self):
        return sum(lev.A.nnz for lev in self.levels) / self.levels[0].A.nnz

    def grid_complexity(self):
        return sum(lev.A.n_rows for lev in self.levels) / self.levels[0].A.n_rows

    def stats(self):
        return {
            "levels": self.num_levels,
            "sizes": [lev.A.n_rows for lev in self.levels],
            "nnz": [lev.A.nnz for lev in self.levels],
            "operator_complexity": self.operator_complexity(),
            "grid_complexity": self.grid_complexity(),
            "cycles": self.cycles,
        }

    def with_cycles(self, cycles):
        """Same levels, different number of cycles per application."""
        return AmgHierarchy(self.levels, self.coarse_solver, cycles, self.params)

    def _cycle(self, l, f):
        lev = self.levels[l]
        if lev.P is None:
            return self.coarse_solver.apply(f)
        A = lev.A
        u = lev.smoother.apply(f)
        fc = lev._R @ (f - A @ u)
        u = u + lev.P @ self._cycle(l + 1, fc)
        return u + lev.smoother.apply_transpose(f - A @ u)

    def vcycle(self, f):
        """One V-cycle from a zero initial guess."""
        return self._cycle(0, self._check(f))

    def apply(self, f):
        f = self._check(f)
        x = self._cycle(0, f)
        for _ in range(self.cycles - 1):
            x = x + self._cycle(0, f - self.A @ x)
        return x


def setup(
    A,
    theta=0.25,
    max_coarse=50,
    max_levels=20,
    stagnation=0.9,
    interp="direct",
    smoother="gs-forward",
    sweeps=1,
    finest_smoother=None,
    cycles=1,
):
    """Build a classical AMG hierarchy for a symmetric matrix.

    Parameters
    ----------
    A : SparseMatrix
        Flagged symmetric; positive definiteness is the caller's promise.
    theta : float
        Strength threshold.
    max_coarse : int
        Stop coarsening once a level has at most this many rows.
    max_levels : int
        Upper bound on the number of levels, coarsest included.
    stagnation : float
        Stop when a coarse level would keep more than this fraction of rows.
    interp : {"direct", "classical"}
    smoother : SmootherKind or str
        Gauss-Seidel (or Jacobi) variant used on every level.
    finest_smoother : LinearOperator, optional
        Replaces the smoother on the finest level only (e.g. an incomplete
        factorization).
    cycles : int
        V-cycles per application.
    """
    if not A.symmetric:
        raise ValueError("AMG setup needs a matrix flagged symmetric")
    if max_levels < 1:
        raise ValueError("max_levels must be >= 1")
    params = dict(theta=theta, max_coarse=max_coarse, max_levels=max_levels,
                  stagnation=stagnation, interp=interp, smoother=str(SmootherKind(smoother).value),
                  sweeps=sweeps)
    levels = []
    current = A
    while current.n_rows > max_coarse and len(levels) + 1 < max_levels:
        G = strength(current, theta)
        splitting = split(G)
        nc = int(splitting.sum())
        if nc == 0 or nc > stagnation * current.n_rows:
            break
        P = interpolation(current, G, splitting, interp)
        Ac = galerkin(current, P)
        if not levels and finest_smoother is not None:
            S = finest_smoother
        else:
            S = Smoother(current, smoother, sweeps=sweeps)
        levels.append(AmgLevel(current, P, S, splitting))
        current = Ac
    levels.append(AmgLevel(current))
    if current.n_rows <= MAX_DENSE:
        coarse = DenseSolveOperator(current)
    else:
        coarse = _SparseCoarseSolver(current)
    return AmgHierarchy(levels, coarse, cycles, params)
