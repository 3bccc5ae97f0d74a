"""Combined smoother / preconditioner sandwich.

Given a smoother ``S`` (any operator with a transpose, e.g. Gauss-Seidel or
an AMG V-cycle) and an SPD preconditioner ``B`` (e.g. incomplete Cholesky),
the multiplicative preconditioner is defined by its error propagation

    I - B_co A = (I - S^T A)(I - B A)(I - S A),

i.e. an ``S`` correction, a ``B`` correction and an ``S^T`` correction
applied in turn.  Expanding gives ``B_co = S~ + (I - S^T A) B (I - A S)``
with ``S~ = S + S^T - S^T A S``, which is SPD whenever ``S`` is
non-expansive in the A-norm and ``B`` is SPD.

Two relatives are provided for comparison: the additive form ``S~ + B`` and
the reversed sandwich ``(I - B A)(I - S~ A)(I - B A)``, which in general is
*not* positive definite.
"""

from enum import Enum

import numpy as np

from .errors import DimensionError
from .operators import LinearOperator
from .smoothers import symmetrized_apply

__all__ = ["Mode", "CombinedPreconditioner"]


class Mode(str, Enum):
    MULTIPLICATIVE = "multiplicative"
    ADDITIVE = "additive"
    WRONG_ORDER = "wrong-order"


class _Transposed(LinearOperator):
    def __init__(self, op):
        self.op = op
        self.n = op.n
        self.symmetric = op.symmetric

    def apply(self, r):
        return self.op.apply_transpose(r)

    def apply_transpose(self, r):
        return self.op.apply(r)


class CombinedPreconditioner(LinearOperator):
    """Matrix-free combination of a smoother and a preconditioner.

    Parameters
    ----------
    A : SparseMatrix
        System matrix (symmetric).
    smoother : LinearOperator
        ``S``; must provide ``apply_transpose``.
    inner : LinearOperator
        ``B``.
    mode : Mode or str
    """

    def __init__(self, A, smoother, inner, mode=Mode.MULTIPLICATIVE):
        n = A.n_rows
        if smoother.n != n or inner.n != n:
            raise DimensionError(
                f"sizes differ: A {n}, smoother {smoother.n}, preconditioner {inner.n}"
            )
        self.A = A
        self.smoother = smoother
        self.inner = inner
        self.mode = Mode(mode)
        self.n = n
        self.symmetric = bool(A.symmetric and inner.symmetric)

    def __repr__(self):
        return f"CombinedPreconditioner({self.mode.value}, S={self.smoother!r}, B={type(self.inner).__name__})"

    def apply_multiplicative(self, f, inner=None):
        B = self.inner if inner is None else inner
        A, S = self.A, self.smoother
        u = S.apply(f)
        u = u + B.apply(f - A @ u)
        return u + S.apply_transpose(f - A @ u)

    def apply_additive(self, f, inner=None):
        B = self.inner if inner is None else inner
        return symmetrized_apply(self.smoother, self.A, f) + B.apply(f)

    def apply_wrong_order(self, f, inner=None):
        B = self.inner if inner is None else inner
        A = self.A
        u = B.apply(f)
        u = u + symmetrized_apply(self.smoother, A, f - A @ u)
        return u + B.apply(f - A @ u)

    def _dispatch(self, f, inner):
        f = self._check(f)
        if self.mode is Mode.MULTIPLICATIVE:
            return self.apply_multiplicative(f, inner)
        if self.mode is Mode.ADDITIVE:
            return self.apply_additive(f, inner)
        return self.apply_wrong_order(f, inner)

    def apply(self, f):
        return self._dispatch(f, None)

    def apply_transpose(self, f):
        # with A symmetric, transposing each form only transposes B
        if self.symmetric:
            return self.apply(f)
        if not self.A.symmetric:
            raise NotImplementedError("transpose needs a symmetric system matrix")
        return self._dispatch(f, _Transposed(self.inner))

    def iterate(self, u, f):
        """One step of the three-stage iteration starting from ``u``.

        Equivalent to ``u + B_co (f - A u)`` in the multiplicative mode.
        """
        if self.mode is not Mode.MULTIPLICATIVE:
            return u + self.apply(f - self.A @ u)
        A, S, B = self.A, self.smoother, self.inner
        u = np.array(u, dtype=np.float64)
        u = u + S.apply(f - A @ u)
        u = u + B.apply(f - A @ u)
        return u + S.apply_transpose(f - A @ u)
