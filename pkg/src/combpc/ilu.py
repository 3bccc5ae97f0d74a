"""Level-of-fill incomplete factorizations ILU(k) and IC(k).

Levels follow the usual rule: stored entries and the diagonal start at
level 0, every other position at infinity; eliminating with pivot row ``m``
updates ``lev(i, j) = min(lev(i, j), lev(i, m) + lev(m, j) + 1)``.  Positions
with level above ``k`` are dropped at the end of each row.  Natural ordering
is used throughout.

For symmetric matrices IC(k) factors ``A ~ L L^T`` on the lower half of the
same pattern and requires every pivot to be positive.
"""

import heapq
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import BreakdownError, FactorizationError
from .operators import LinearOperator
from .sparse import SparseMatrix

__all__ = [
    "FillLevelPattern",
    "IncompleteFactorization",
    "symbolic_factor",
    "numeric_factor",
    "ilu",
    "ichol",
    "fill_magnitude_by_level",
]


@dataclass(frozen=True)
class FillLevelPattern:
    """Retained positions of ILU(k) in CSR layout with their fill levels."""

    n: int
    k: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    levels: np.ndarray

    @property
    def nnz(self):
        return int(self.row_offsets[-1])

    def positions(self):
        """Set of (i, j) pairs, mostly for tests."""
        rows = np.repeat(np.arange(self.n), np.diff(self.row_offsets))
        return set(zip(rows.tolist(), self.col_indices.tolist()))

    def level_dict(self):
        rows = np.repeat(np.arange(self.n), np.diff(self.row_offsets))
        return {(i, j): int(l) for i, j, l in zip(rows, self.col_indices, self.levels)}

    def lower(self):
        """(row_offsets, col_indices) of the j <= i part."""
        rows = np.repeat(np.arange(self.n), np.diff(self.row_offsets))
        keep = self.col_indices <= rows
        ptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows[keep], minlength=self.n), out=ptr[1:])
        return ptr, self.col_indices[keep]


def symbolic_factor(A, k):
    """Level-of-fill pattern of ILU(k) for ``A`` in natural order."""
    if A.n_rows != A.n_cols:
        raise ValueError("ILU needs a square matrix")
    k = int(k)
    if k < 0:
        raise ValueError("fill level must be >= 0")
    n = A.n_rows
    ptr, ind = A.row_offsets, A.col_indices
    upper = [None] * n  # upper[m]: list of (j, level) for retained j > m
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    out_ind, out_lev = [], []
    for i in range(n):
        row = dict.fromkeys(ind[ptr[i]:ptr[i + 1]].tolist(), 0)
        row[i] = 0
        heap = [j for j in row if j < i]
        heapq.heapify(heap)
        while heap:
            m = heapq.heappop(heap)
            lim = row[m]
            if lim > k:
                continue
            for j, lmj in upper[m]:
                new = lim + lmj + 1
                old = row.get(j)
                if old is None:
                    row[j] = new
                    if j < i:
                        heapq.heappush(heap, j)
                elif new < old:
                    row[j] = new
        kept = sorted((j, l) for j, l in row.items() if l <= k)
        upper[i] = [(j, l) for j, l in kept if j > i]
        out_ind.extend(j for j, _ in kept)
        out_lev.extend(l for _, l in kept)
        out_ptr[i + 1] = len(out_ind)
    return FillLevelPattern(
        n=n,
        k=k,
        row_offsets=out_ptr,
        col_indices=np.asarray(out_ind, dtype=np.int64),
        levels=np.asarray(out_lev, dtype=np.int64),
    )


@dataclass
class IncompleteFactorization(LinearOperator):
    """Factors of ILU(k) or IC(k); applying it computes ``U^{-1} L^{-1} r``.

    For ``variant == "ilu"`` ``L`` is unit lower triangular (diagonal not
    stored); for ``"ic"`` ``L`` carries a positive diagonal and ``U = L^T``.
    """

    L: SparseMatrix
    U: SparseMatrix
    variant: str
    k: int
    pattern: FillLevelPattern = field(repr=False)
    shift: float = 0.0

    def __post_init__(self):
        self.n = self.L.n_rows
        self.symmetric = self.variant == "ic"
        self._unit = self.variant == "ilu"
        self._LT = None
        self._UT = None

    def apply(self, r):
        r = self._check(r)
        L, U = self.L, self.U
        y = _kernels.lower_solve(L.row_offsets, L.col_indices, L.values, r, self._unit)
        return _kernels.upper_solve(U.row_offsets, U.col_indices, U.values, y, False)

    def apply_transpose(self, r):
        if self.symmetric:
            return self.apply(r)
        r = self._check(r)
        if self._UT is None:
            self._UT, self._LT = self.U.T, self.L.T
        UT, LT = self._UT, self._LT
        y = _kernels.lower_solve(UT.row_offsets, UT.col_indices, UT.values, r, False)
        return _kernels.upper_solve(LT.row_offsets, LT.col_indices, LT.values, y, True)

    def product(self):
        """L U (or L L^T) as a sparse matrix."""
        if self._unit:
            n = self.n
            Lfull = self.L.to_scipy() + sp.identity(n, format="csr")
            return SparseMatrix.from_scipy(Lfull @ self.U.to_scipy())
        return SparseMatrix.from_scipy(self.L.to_scipy() @ self.U.to_scipy())


def _split_lower_upper(n, ptr, ind, val, strict_lower):
    rows = np.repeat(np.arange(n), np.diff(ptr))
    lo = ind < rows if strict_lower else ind <= rows
    L = SparseMatrix.from_coo(rows[lo], ind[lo], val[lo], (n, n))
    hi = ~lo
    U = SparseMatrix.from_coo(rows[hi], ind[hi], val[hi], (n, n))
    return L, U


def numeric_factor(A, pattern, variant="ilu", shift=0.0):
    """Numerical ILU/IC restricted to ``pattern``.

    ``shift`` factors ``A + shift*I`` instead of ``A``.

    Raises
    ------
    FactorizationError
        zero pivot (ILU).
    BreakdownError
        nonpositive pivot (IC).
    """
    if variant not in ("ilu", "ic"):
        raise ValueError(f"unknown variant {variant!r}")
    if pattern.n != A.n_rows:
        raise ValueError("pattern and matrix sizes differ")
    M = A.shifted(shift) if shift else A
    n = M.n_rows
    if variant == "ic":
        if not M.symmetric:
            raise ValueError("IC needs a matrix flagged symmetric")
        lptr, lind = pattern.lower()
        val, bad, pivot = _kernels.ic_numeric(
            M.row_offsets, M.col_indices, M.values, lptr, lind
        )
        if bad >= 0:
            raise BreakdownError(
                f"incomplete Cholesky breakdown: pivot {pivot:.6g} <= 0 at row {bad}", bad
            )
        rows = np.repeat(np.arange(n), np.diff(lptr))
        L = SparseMatrix.from_coo(rows, lind, val, (n, n))
        U = L.T
    else:
        val, bad = _kernels.ilu_numeric(
            M.row_offsets, M.col_indices, M.values, pattern.row_offsets, pattern.col_indices
        )
        if bad >= 0:
            raise FactorizationError(f"zero pivot in incomplete LU at row {bad}", bad)
        L, U = _split_lower_upper(n, pattern.row_offsets, pattern.col_indices, val, True)
    return IncompleteFactorization(L=L, U=U, variant=variant, k=pattern.k, pattern=pattern, shift=float(shift))


def ilu(A, k=0, shift=0.0):
    """ILU(k) of ``A``."""
    return numeric_factor(A, symbolic_factor(A, k), "ilu", shift)


def ichol(A, k=0, shift=0.0):
    """IC(k) of a symmetric ``A``."""
    return numeric_factor(A, symbolic_factor(A, k), "ic", shift)


def fill_magnitude_by_level(A, max_level):
    """Mean |u_ij| of the ILU(max_level) factor grouped by fill level.

    A diagnostic for the heuristic that higher-level fill tends to be
    smaller; returns ``{level: mean magnitude}`` relative to the mean
    level-0 off-diagonal magnitude.
    """
    F = ilu(A, max_level)
    pat = F.pattern
    lev = pat.level_dict()
    U = F.U.to_scipy().tocoo()
    Lm = F.L.to_scipy().tocoo()
    sums, counts = {}, {}
    for mat in (Lm, U):
        for i, j, v in zip(mat.row, mat.col, mat.data):
            if i == j:
                continue
            l = lev[(int(i), int(j))]
            sums[l] = sums.get(l, 0.0) + abs(v)
            counts[l] = counts.get(l, 0) + 1
    base = sums[0] / counts[0] if counts.get(0) else 1.0
    return {l: sums[l] / counts[l] / base for l in sorted(sums)}
