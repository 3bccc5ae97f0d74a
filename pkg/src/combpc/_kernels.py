"""Numba kernels over raw CSR arrays (sorted column indices assumed)."""

import numpy as np
from numba import njit


@njit(cache=True)
def lower_solve(indptr, indices, data, b, unit_diagonal):
    """Solve (D + L) x = b using only entries with j <= i of each row.

    Entries above the diagonal are ignored, so this is one forward
    Gauss-Seidel sweep from zero when applied to the full matrix.
    """
    n = b.shape[0]
    x = np.empty(n)
    for i in range(n):
        s = b[i]
        d = 1.0
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j < i:
                s -= data[p] * x[j]
            elif j == i:
                d = data[p]
            else:
                break
        x[i] = s if unit_diagonal else s / d
    return x


@njit(cache=True)
def upper_solve(indptr, indices, data, b, unit_diagonal):
    """Solve (D + U) x = b using only entries with j >= i of each row."""
    n = b.shape[0]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        s = b[i]
        d = 1.0
        for p in range(indptr[i + 1] - 1, indptr[i] - 1, -1):
            j = indices[p]
            if j > i:
                s -= data[p] * x[j]
            elif j == i:
                d = data[p]
            else:
                break
        x[i] = s if unit_diagonal else s / d
    return x


@njit(cache=True)
def ilu_numeric(a_ptr, a_ind, a_val, p_ptr, p_ind):
    """IKJ elimination restricted to the pattern (p_ptr, p_ind).

    Returns (values on the pattern, failing row or -1).  The strict lower
    part of the result holds the unit-lower factor, the rest holds U.
    """
    n = p_ptr.shape[0] - 1
    val = np.zeros(p_ind.shape[0])
    pos = np.full(n, -1, dtype=np.int64)
    diag = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        lo, hi = p_ptr[i], p_ptr[i + 1]
        for p in range(lo, hi):
            pos[p_ind[p]] = p
            if p_ind[p] == i:
                diag[i] = p
        for q in range(a_ptr[i], a_ptr[i + 1]):
            p = pos[a_ind[q]]
            if p >= lo:
                val[p] += a_val[q]
        for p in range(lo, hi):
            j = p_ind[p]
            if j >= i:
                break
            val[p] /= val[diag[j]]
            lij = val[p]
            for q in range(diag[j] + 1, p_ptr[j + 1]):
                t = pos[p_ind[q]]
                if t >= lo:
                    val[t] -= lij * val[q]
        if diag[i] < 0 or val[diag[i]] == 0.0:
            return val, i
        for p in range(lo, hi):
            pos[p_ind[p]] = -1
    return val, -1


@njit(cache=True)
def ic_numeric(a_ptr, a_ind, a_val, l_ptr, l_ind):
    """Row-oriented incomplete Cholesky on a lower-triangular pattern.

    Each row's diagonal must be its last pattern entry.  Returns (values,
    failing row or -1, offending pivot).  On success (L L^T)_ij == a_ij at
    every retained position.
    """
    n = l_ptr.shape[0] - 1
    val = np.zeros(l_ind.shape[0])
    pos = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        lo, hi = l_ptr[i], l_ptr[i + 1]
        for p in range(lo, hi):
            pos[l_ind[p]] = p
        for q in range(a_ptr[i], a_ptr[i + 1]):
            j = a_ind[q]
            if j > i:
                break
            p = pos[j]
            if p >= lo:
                val[p] += a_val[q]
        dsum = 0.0
        for p in range(lo, hi - 1):
            j = l_ind[p]
            s = val[p]
            # row j of L without its diagonal
            for q in range(l_ptr[j], l_ptr[j + 1] - 1):
                t = pos[l_ind[q]]
                if t >= lo:
                    s -= val[t] * val[q]
            s /= val[l_ptr[j + 1] - 1]
            val[p] = s
            dsum += s * s
        d = val[hi - 1] - dsum
        if not d > 0.0:
            return val, i, d
        val[hi - 1] = np.sqrt(d)
        for p in range(lo, hi):
            pos[l_ind[p]] = -1
    return val, -1, 0.0
