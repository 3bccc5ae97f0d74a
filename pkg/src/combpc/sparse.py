"""Compressed-row sparse matrices and vector kernels.

Every matrix is kept in canonical CSR form: column indices strictly
increasing within each row, duplicates summed at construction.  Symmetric
matrices use full storage; the ``symmetric`` flag is an asserted property of
the stored entries, checked exactly when the matrix is built.

The heavy lifting (matrix-vector products, transposes, sparse products) is
delegated to :mod:`scipy.sparse`, whose CSR product accumulates each row
left to right in storage order.
"""

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError

__all__ = [
    "MAX_DENSE",
    "SparseMatrix",
    "spmv",
    "to_dense",
    "from_dense",
    "dot",
    "axpy",
    "norm2",
    "as_vector",
    "check_dense_size",
]

#: Largest dimension for which dense oracle computations are permitted.
MAX_DENSE = 2048


def check_dense_size(n):
    if n > MAX_DENSE:
        raise ValueError(f"dense computation requested for n={n} > {MAX_DENSE}")


def as_vector(x, n=None, name="vector"):
    """Return ``x`` as a finite 1-D float64 array, optionally of length ``n``."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise DimensionError(f"{name} has length {v.shape[0]}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains NaN or Inf")
    return v


class SparseMatrix:
    """Immutable CSR matrix.

    Parameters
    ----------
    row_offsets, col_indices, values : array_like
        Raw CSR arrays.  They need not be sorted or duplicate free; the
        constructor canonicalizes them.
    shape : (int, int)
    symmetric : bool
        Assert that the stored pattern and values are exactly symmetric.
        Raises ``ValueError`` if they are not.
    """

    __slots__ = ("_csr", "symmetric", "_transpose")

    def __init__(self, row_offsets, col_indices, values, shape, symmetric=False):
        n_rows, n_cols = (int(s) for s in shape)
        ptr = np.asarray(row_offsets, dtype=np.int64)
        ind = np.asarray(col_indices, dtype=np.int64)
        val = np.asarray(values, dtype=np.float64)
        if ptr.shape != (n_rows + 1,):
            raise ValueError("row_offsets must have length n_rows + 1")
        if ptr[0] != 0 or np.any(np.diff(ptr) < 0):
            raise ValueError("row_offsets must start at 0 and be nondecreasing")
        if ptr[-1] != ind.shape[0] or ind.shape != val.shape:
            raise ValueError("row_offsets[-1], len(col_indices), len(values) disagree")
        if ind.size and (ind.min() < 0 or ind.max() >= n_cols):
            raise ValueError("column index out of range")
        if not np.all(np.isfinite(val)):
            raise ValueError("matrix values must be finite")
        csr = sp.csr_matrix((val.copy(), ind.copy(), ptr.copy()), shape=(n_rows, n_cols))
        csr.sum_duplicates()
        csr.sort_indices()
        self._init_from_canonical(csr, symmetric)

    def _init_from_canonical(self, csr, symmetric):
        csr.indptr = csr.indptr.astype(np.int64, copy=False)
        csr.indices = csr.indices.astype(np.int64, copy=False)
        for arr in (csr.indptr, csr.indices, csr.data):
            arr.flags.writeable = False
        self._csr = csr
        self._transpose = None
        self.symmetric = bool(symmetric)
        if self.symmetric:
            if csr.shape[0] != csr.shape[1]:
                raise ValueError("a symmetric matrix must be square")
            t = csr.transpose().tocsr()
            t.sort_indices()
            if not (
                np.array_equal(t.indptr, csr.indptr)
                and np.array_equal(t.indices, csr.indices)
                and np.array_equal(t.data, csr.data)
            ):
                raise ValueError("stored entries are not exactly symmetric")

    # -- constructors ---------------------------------------------------
    @classmethod
    def from_scipy(cls, M, symmetric=False):
        csr = sp.csr_matrix(M, dtype=np.float64, copy=True)
        csr.sum_duplicates()
        csr.sort_indices()
        if not np.all(np.isfinite(csr.data)):
            raise ValueError("matrix values must be finite")
        obj = cls.__new__(cls)
        obj._init_from_canonical(csr, symmetric)
        return obj

    @classmethod
    def from_coo(cls, rows, cols, values, shape, symmetric=False):
        """Build from triplets; duplicate positions are summed."""
        coo = sp.coo_matrix(
            (np.asarray(values, dtype=np.float64), (np.asarray(rows), np.asarray(cols))),
            shape=shape,
        )
        return cls.from_scipy(coo.tocsr(), symmetric=symmetric)

    @classmethod
    def from_dense(cls, M, symmetric=None):
        """Store the nonzeros of a dense array.  ``symmetric=None`` detects it."""
        M = np.asarray(M, dtype=np.float64)
        if M.ndim != 2:
            raise ValueError("dense matrix must be 2-D")
        if symmetric is None:
            symmetric = M.shape[0] == M.shape[1] and np.array_equal(M, M.T)
        return cls.from_scipy(sp.csr_matrix(M), symmetric=symmetric)

    @classmethod
    def identity(cls, n):
        return cls.from_scipy(sp.identity(n, format="csr"), symmetric=True)

    # -- attributes -----------------------------------------------------
    @property
    def shape(self):
        return self._csr.shape

    @property
    def n_rows(self):
        return self._csr.shape[0]

    @property
    def n_cols(self):
        return self._csr.shape[1]

    @property
    def row_offsets(self):
        return self._csr.indptr

    @property
    def col_indices(self):
        return self._csr.indices

    @property
    def values(self):
        return self._csr.data

    @property
    def nnz(self):
        return int(self._csr.indptr[-1])

    @property
    def symmetry_flag(self):
        return "symmetric" if self.symmetric else "general"

    def to_scipy(self):
        """Read-only scipy CSR view sharing this matrix's arrays."""
        return self._csr

    def row(self, i):
        lo, hi = self._csr.indptr[i], self._csr.indptr[i + 1]
        return self._csr.indices[lo:hi], self._csr.data[lo:hi]

    def diagonal(self):
        return self._csr.diagonal()

    @property
    def T(self):
        if self.symmetric:
            return self
        if self._transpose is None:
            self._transpose = SparseMatrix.from_scipy(self._csr.transpose())
        return self._transpose

    def asymmetry(self):
        """Largest |a_ij - a_ji| over stored entries."""
        d = self._csr - self._csr.transpose()
        return float(abs(d).max()) if d.nnz else 0.0

    def symmetrized(self):
        """(A + A^T)/2 flagged symmetric; exact because fp addition commutes."""
        return SparseMatrix.from_scipy(
            (self._csr + self._csr.transpose()) * 0.5, symmetric=True
        )

    # -- products -------------------------------------------------------
    def matvec(self, x):
        return spmv(self, x)

    def __matmul__(self, other):
        if isinstance(other, SparseMatrix):
            if self.n_cols != other.n_rows:
                raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
            return SparseMatrix.from_scipy(self._csr @ other._csr)
        return spmv(self, other)

    def scaled(self, alpha):
        return SparseMatrix.from_scipy(self._csr * float(alpha), symmetric=self.symmetric)

    def shifted(self, alpha):
        """A + alpha*I (square matrices only)."""
        if alpha == 0.0:
            return self
        n = self.n_rows
        return SparseMatrix.from_scipy(
            self._csr + float(alpha) * sp.identity(n, format="csr"),
            symmetric=self.symmetric,
        )

    def to_dense(self):
        return to_dense(self)

    def __repr__(self):
        return (
            f"SparseMatrix(shape={self.shape}, nnz={self.nnz}, "
            f"symmetry={self.symmetry_flag})"
        )


def spmv(A, x):
    """y = A x."""
    v = as_vector(x, name="x")
    if v.shape[0] != A.n_cols:
        raise DimensionError(f"matrix has {A.n_cols} columns, vector has {v.shape[0]}")
    return A.to_scipy() @ v


def to_dense(A):
    check_dense_size(A.n_rows)
    return A.to_scipy().toarray()


def from_dense(M, symmetric=None):
    return SparseMatrix.from_dense(M, symmetric=symmetric)


def _pair(x, y):
    x = as_vector(x, name="x")
    y = as_vector(y, name="y")
    if x.shape != y.shape:
        raise DimensionError(f"lengths differ: {x.shape[0]} vs {y.shape[0]}")
    return x, y


def dot(x, y):
    x, y = _pair(x, y)
    return float(np.dot(x, y))


def axpy(alpha, x, y):
    """Return alpha*x + y (new array)."""
    x, y = _pair(x, y)
    return alpha * x + y


def norm2(x):
    x = as_vector(x, name="x")
    return float(np.sqrt(np.dot(x, x)))
