"""Stationary smoothers in correction form.

A smoother ``S`` maps a residual ``r`` to a correction ``S r``.  One sweep
from a zero initial guess gives

* Jacobi: ``weight * D^{-1} r``
* forward Gauss-Seidel: ``(D + L)^{-1} r``
* backward Gauss-Seidel: ``(D + U)^{-1} r``
* symmetric Gauss-Seidel: forward sweep followed by a backward sweep.

Several sweeps compose the iteration on the error equation, so that
``I - S_k A = (I - S_1 A)^k``.
"""

from enum import Enum

import numpy as np

from . import _kernels
from .operators import LinearOperator

__all__ = ["SmootherKind", "Smoother", "symmetrized_apply"]


class SmootherKind(str, Enum):
    JACOBI = "jacobi"
    GS_FORWARD = "gs-forward"
    GS_BACKWARD = "gs-backward"
    GS_SYMMETRIC = "gs-symmetric"


def symmetrized_apply(S, A, r):
    """Apply ``S + S^T - S^T A S`` to ``r``.

    Works for any operator with ``apply``/``apply_transpose``; the result
    satisfies ``I - S~A = (I - S^T A)(I - S A)``.
    """
    s = S.apply(r)
    return s + S.apply_transpose(r - A @ s)


class Smoother(LinearOperator):
    """Jacobi or Gauss-Seidel smoother for a matrix with positive diagonal.

    Parameters
    ----------
    A : SparseMatrix
    kind : SmootherKind or str
    sweeps : int
        Number of sweeps per application.
    weight : float
        Jacobi damping, in (0, 1].  Ignored by Gauss-Seidel.
    """

    def __init__(self, A, kind=SmootherKind.GS_FORWARD, sweeps=1, weight=1.0):
        if A.n_rows != A.n_cols:
            raise ValueError("smoother needs a square matrix")
        self.kind = SmootherKind(kind)
        if int(sweeps) < 1:
            raise ValueError("sweeps must be >= 1")
        if not 0.0 < weight <= 1.0:
            raise ValueError("Jacobi weight must lie in (0, 1]")
        diag = A.diagonal()
        bad = np.flatnonzero(~(diag > 0.0))
        if bad.size:
            raise ValueError(f"smoother needs a positive diagonal; row {bad[0]} has {diag[bad[0]]}")
        self.A = A
        self.n = A.n_rows
        self.sweeps = int(sweeps)
        self.weight = float(weight)
        self._diag = diag
        if self.kind is SmootherKind.JACOBI:
            self.symmetric = True
        elif self.kind is SmootherKind.GS_SYMMETRIC:
            self.symmetric = A.symmetric
        else:
            self.symmetric = False

    def __repr__(self):
        return f"Smoother({self.kind.value}, sweeps={self.sweeps}, n={self.n})"

    # single sweeps from zero on matrix M (A or A^T)
    def _forward(self, M, r):
        return _kernels.lower_solve(M.row_offsets, M.col_indices, M.values, r, False)

    def _backward(self, M, r):
        return _kernels.upper_solve(M.row_offsets, M.col_indices, M.values, r, False)

    def _sweep(self, M, r, transpose):
        kind = self.kind
        if kind is SmootherKind.JACOBI:
            return self.weight * r / self._diag
        if transpose:
            # (D+L)^T is the upper triangle of M = A^T, and vice versa
            if kind is SmootherKind.GS_FORWARD:
                return self._backward(M, r)
            if kind is SmootherKind.GS_BACKWARD:
                return self._forward(M, r)
            x = self._forward(M, r)
            return x + self._backward(M, r - M @ x)
        if kind is SmootherKind.GS_FORWARD:
            return self._forward(M, r)
        if kind is SmootherKind.GS_BACKWARD:
            return self._backward(M, r)
        x = self._forward(M, r)
        return x + self._backward(M, r - M @ x)

    def _iterate(self, r, transpose):
        r = self._check(r)
        M = self.A.T if transpose else self.A
        x = self._sweep(M, r, transpose)
        for _ in range(self.sweeps - 1):
            x = x + self._sweep(M, r - M @ x, transpose)
        return x

    def apply(self, r):
        return self._iterate(r, transpose=False)

    def apply_transpose(self, r):
        return self._iterate(r, transpose=True)

    def symmetrized_apply(self, r):
        return symmetrized_apply(self, self.A, r)
