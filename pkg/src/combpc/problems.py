"""Structured-grid model problems for ``-div(a grad p) + c p = f``.

Unknowns sit on the interior nodes of a uniform grid over the unit box with
homogeneous Dirichlet data; each node carries one coefficient value.  The
coupling between neighbouring nodes uses the harmonic mean of their
coefficients, the coupling to a boundary node uses the node's own value.
Rows are scaled by the node volume ``prod(h)`` (finite-volume form), so a
1-D problem with ``h = 1`` and ``a = 1`` is exactly ``tridiag(-1, 2, -1)``.

Unknowns are ordered lexicographically with the last axis fastest
(``numpy.ravel_multi_index`` order).
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from .sparse import SparseMatrix

__all__ = [
    "Constant",
    "Checkerboard",
    "Lognormal",
    "Layered",
    "parse_field",
    "ProblemSpec",
    "GeneratedProblem",
    "generate",
    "manufactured_error",
    "laplacian",
    "random_spd",
]


@dataclass(frozen=True)
class Constant:
    a: float = 1.0

    def sample(self, cells):
        return np.full(cells, float(self.a))

    def describe(self):
        return f"constant:{self.a!r}"


@dataclass(frozen=True)
class Checkerboard:
    """Tiles alternating between ``low`` and ``high``; ``tiles`` per axis."""

    low: float = 1.0
    high: float = 1e8
    tiles: int = 4

    def sample(self, cells):
        idx = np.indices(cells)
        parity = np.zeros(cells, dtype=np.int64)
        for d, nd in enumerate(cells):
            parity += (idx[d] * self.tiles) // nd
        return np.where(parity % 2 == 0, float(self.low), float(self.high))

    def describe(self):
        return f"checkerboard:{self.low!r},{self.high!r},{self.tiles}"


@dataclass(frozen=True)
class Lognormal:
    """``exp(sigma * g)`` with independent standard normal ``g`` per node.

    With ``contrast`` set, the log-field is rescaled affinely so the values
    span exactly ``[1, contrast]`` (``sigma`` then only fixes the sample).
    """

    seed: int = 0
    sigma: float = 1.0
    contrast: float | None = None

    def sample(self, cells):
        rng = np.random.default_rng(self.seed)
        g = self.sigma * rng.standard_normal(cells)
        if self.contrast is not None:
            span = g.max() - g.min()
            t = (g - g.min()) / span if span > 0 else np.zeros_like(g)
            return np.exp(t * np.log(self.contrast))
        return np.exp(g)

    def describe(self):
        tail = "" if self.contrast is None else f",{self.contrast!r}"
        return f"lognormal:{self.seed},{self.sigma!r}{tail}"


@dataclass(frozen=True)
class Layered:
    """Piecewise constant along the last axis, equal-thickness layers."""

    values: tuple = (1.0,)

    def sample(self, cells):
        values = np.asarray(self.values, dtype=np.float64)
        nz = cells[-1]
        layer = (np.arange(nz) * len(values)) // nz
        return np.broadcast_to(values[layer], cells).copy()

    def describe(self):
        return "layered:" + ",".join(repr(float(v)) for v in self.values)


def parse_field(text):
    """Parse ``kind:args`` such as ``checkerboard:1,1e8,4`` or ``lognormal:3,2.0,1e8``."""
    kind, _, args = text.partition(":")
    vals = [v for v in args.split(",") if v.strip()] if args else []
    kind = kind.strip().lower()
    try:
        if kind == "constant":
            return Constant(*(float(v) for v in vals))
        if kind == "checkerboard":
            nums = [float(v) for v in vals[:2]]
            if len(vals) > 2:
                return Checkerboard(*nums, int(vals[2]))
            return Checkerboard(*nums)
        if kind == "lognormal":
            seed = int(vals[0]) if vals else 0
            return Lognormal(seed, *(float(v) for v in vals[1:3]))
        if kind == "layered":
            return Layered(tuple(float(v) for v in vals))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad coefficient field {text!r}: {exc}") from None
    raise ValueError(f"unknown coefficient field {kind!r}")


@dataclass(frozen=True)
class ProblemSpec:
    """
    Parameters
    ----------
    cells : tuple of int
        Interior nodes per axis; its length is the dimension.
    field : coefficient field
    reaction : float
        ``c >= 0``.
    spacing : float or None
        Grid spacing used for every axis; ``None`` means ``1/(n+1)`` per
        axis (unit box).
    rhs : {"auto", "manufactured", "discrete", "ones", "random"}
        ``manufactured`` uses ``p = prod(sin(pi x_d))`` and the continuous
        right-hand side (constant coefficients only); ``discrete`` sets
        ``f = A p`` so ``p`` is the exact discrete solution; ``auto`` picks
        the first for constant fields and the second otherwise.
    seed : int
        Seed for ``rhs="random"``.
    """

    cells: tuple
    field: object = field(default_factory=Constant)
    reaction: float = 0.0
    spacing: float | None = None
    rhs: str = "auto"
    seed: int = 0

    def __post_init__(self):
        cells = tuple(int(c) for c in np.atleast_1d(self.cells))
        object.__setattr__(self, "cells", cells)
        if not 1 <= len(cells) <= 3 or min(cells) < 1:
            raise ValueError("cells must list 1 to 3 positive counts")
        if self.reaction < 0:
            raise ValueError("reaction coefficient must be >= 0")
        if self.rhs not in ("auto", "manufactured", "discrete", "ones", "random"):
            raise ValueError(f"unknown rhs {self.rhs!r}")

    @property
    def dim(self):
        return len(self.cells)

    def to_dict(self):
        return {
            "dim": self.dim,
            "cells": list(self.cells),
            "field": self.field.describe(),
            "reaction": self.reaction,
            "spacing": self.spacing,
            "rhs": self.rhs,
            "seed": self.seed,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        return cls(
            cells=tuple(d["cells"]),
            field=parse_field(d["field"]),
            reaction=d.get("reaction", 0.0),
            spacing=d.get("spacing"),
            rhs=d.get("rhs", "auto"),
            seed=d.get("seed", 0),
        )


@dataclass
class GeneratedProblem:
    A: SparseMatrix
    f: np.ndarray
    spec: ProblemSpec
    exact_solution: np.ndarray | None = None
    coefficients: np.ndarray | None = None


def _spacings(spec):
    if spec.spacing is not None:
        return tuple(float(spec.spacing) for _ in spec.cells)
    return tuple(1.0 / (n + 1) for n in spec.cells)


def _assemble(coef, h, reaction):
    cells = coef.shape
    n = coef.size
    idx = np.arange(n).reshape(cells)
    vol = float(np.prod(h))
    diag = np.full(n, reaction * vol)
    rows, cols, vals = [], [], []
    for d in range(len(cells)):
        geom = vol / h[d] ** 2
        lo = [slice(None)] * len(cells)
        hi = [slice(None)] * len(cells)
        lo[d], hi[d] = slice(0, -1), slice(1, None)
        a1, a2 = coef[tuple(lo)], coef[tuple(hi)]
        t = (geom * 2.0 * a1 * a2 / (a1 + a2)).ravel()
        i1, i2 = idx[tuple(lo)].ravel(), idx[tuple(hi)].ravel()
        rows += [i1, i2]
        cols += [i2, i1]
        vals += [-t, -t]
        np.add.at(diag, i1, t)
        np.add.at(diag, i2, t)
        # Dirichlet neighbours at both ends of the axis
        first = [slice(None)] * len(cells)
        last = [slice(None)] * len(cells)
        first[d], last[d] = 0, -1
        for sl in (first, last):
            np.add.at(diag, idx[tuple(sl)].ravel(), geom * coef[tuple(sl)].ravel())
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag)
    M = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    return SparseMatrix.from_scipy(M, symmetric=True)


def _nodes(cells, h):
    axes = [h_d * np.arange(1, n + 1) for n, h_d in zip(cells, h)]
    return np.meshgrid(*axes, indexing="ij")


def generate(spec):
    """Assemble matrix, right-hand side and (if known) exact solution."""
    coef = np.asarray(spec.field.sample(spec.cells), dtype=np.float64)
    if coef.shape != spec.cells:
        raise ValueError("coefficient field returned the wrong shape")
    if not np.all(coef > 0) or not np.all(np.isfinite(coef)):
        raise ValueError("coefficients must be finite and strictly positive")
    h = _spacings(spec)
    A = _assemble(coef, h, spec.reaction)
    vol = float(np.prod(h))
    p = np.ones(spec.cells)
    for x in _nodes(spec.cells, h):
        p = p * np.sin(np.pi * x)
    p = p.ravel()

    mode = spec.rhs
    if mode == "auto":
        mode = "manufactured" if isinstance(spec.field, Constant) else "discrete"
    exact = None
    if mode == "manufactured":
        if not isinstance(spec.field, Constant):
            raise ValueError("manufactured right-hand side needs a constant coefficient")
        f = (spec.field.a * spec.dim * np.pi**2 + spec.reaction) * p * vol
        exact = p
    elif mode == "discrete":
        f = A @ p
        exact = p
    elif mode == "ones":
        f = np.full(A.n_rows, vol)
    else:
        f = np.random.default_rng(spec.seed).standard_normal(A.n_rows)
    return GeneratedProblem(A=A, f=f, spec=spec, exact_solution=exact, coefficients=coef)


def manufactured_error(problem, x):
    """Max-norm distance to the exact solution."""
    if problem.exact_solution is None:
        raise ValueError("problem has no exact solution")
    return float(np.max(np.abs(np.asarray(x) - problem.exact_solution)))


def laplacian(*cells):
    """Unscaled constant-coefficient Laplacian, e.g. ``laplacian(8, 8)``
    is the 5-point matrix with 4 on the diagonal."""
    return generate(ProblemSpec(cells=cells, spacing=1.0, rhs="ones")).A


def random_spd(n, rng, cond=100.0, density=0.3, m_matrix=False):
    """Random sparse SPD matrix with spectrum spanning ``[1, cond]``.

    A random symmetric pattern is filled with normal values (nonpositive
    ones if ``m_matrix``), then shifted and scaled on its diagonal so the
    extreme eigenvalues are exactly 1 and ``cond`` up to rounding.
    """
    from .sparse import check_dense_size

    check_dense_size(n)
    mask = np.triu(rng.random((n, n)) < density, 1)
    W = np.where(mask, rng.standard_normal((n, n)), 0.0)
    if m_matrix:
        W = -np.abs(W)
    W = W + W.T
    lam = np.linalg.eigvalsh(W)
    lo, hi = lam[0], lam[-1]
    if hi - lo <= 0.0:
        dense = np.eye(n)
    else:
        scale = (cond - 1.0) / (hi - lo)
        dense = scale * (W - lo * np.eye(n)) + np.eye(n)
    dense = 0.5 * (dense + dense.T)
    return SparseMatrix.from_dense(dense, symmetric=True)
