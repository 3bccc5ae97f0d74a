"""Minimal linear-operator protocol used by smoothers and preconditioners.

An operator maps a residual to a correction.  It advertises its size and
whether it is self-adjoint in the Euclidean inner product; PCG refuses
operators that do not declare ``symmetric = True``.
"""

import numpy as np
import scipy.linalg as sla

from .errors import DimensionError
from .sparse import as_vector

__all__ = [
    "LinearOperator",
    "IdentityOperator",
    "ZeroOperator",
    "DenseOperator",
    "DenseSolveOperator",
    "ScaledOperator",
]


class LinearOperator:
    """Base class: subclasses set ``n`` and implement :meth:`apply`.

    ``apply_transpose`` defaults to ``apply`` for operators declared
    symmetric.
    """

    n = 0
    symmetric = False

    @property
    def shape(self):
        return (self.n, self.n)

    def apply(self, r):
        raise NotImplementedError

    def apply_transpose(self, r):
        if self.symmetric:
            return self.apply(r)
        raise NotImplementedError(f"{type(self).__name__} has no transpose")

    def __call__(self, r):
        return self.apply(r)

    def _check(self, r):
        v = as_vector(r, name="residual")
        if v.shape[0] != self.n:
            raise DimensionError(f"operator of size {self.n} applied to length {v.shape[0]}")
        return v


class IdentityOperator(LinearOperator):
    symmetric = True

    def __init__(self, n):
        self.n = int(n)

    def apply(self, r):
        return self._check(r).copy()


class ZeroOperator(LinearOperator):
    symmetric = True

    def __init__(self, n):
        self.n = int(n)

    def apply(self, r):
        return np.zeros_like(self._check(r))


class DenseOperator(LinearOperator):
    """Wrap an explicit matrix.  Symmetry is detected exactly unless given."""

    def __init__(self, M, symmetric=None):
        M = np.asarray(M, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("DenseOperator needs a square matrix")
        self.M = M
        self.n = M.shape[0]
        self.symmetric = bool(np.array_equal(M, M.T)) if symmetric is None else symmetric

    def apply(self, r):
        return self.M @ self._check(r)

    def apply_transpose(self, r):
        return self.M.T @ self._check(r)


class DenseSolveOperator(LinearOperator):
    """A^{-1} through a dense Cholesky factorization (SPD ``A``)."""

    symmetric = True

    def __init__(self, A):
        dense = A.to_dense() if hasattr(A, "to_dense") else np.asarray(A, dtype=np.float64)
        self.n = dense.shape[0]
        self._factor = sla.cho_factor(dense, lower=True)

    def apply(self, r):
        return sla.cho_solve(self._factor, self._check(r))


class ScaledOperator(LinearOperator):
    """sigma * op."""

    def __init__(self, op, sigma):
        self.op = op
        self.sigma = float(sigma)
        self.n = op.n
        self.symmetric = op.symmetric

    def apply(self, r):
        return self.sigma * self.op.apply(r)

    def apply_transpose(self, r):
        return self.sigma * self.op.apply_transpose(r)
