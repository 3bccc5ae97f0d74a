"""Matrix Market coordinate IO (real field, general or symmetric).

Indices are 1-based in files and 0-based in memory.  Symmetric files store
the lower triangle only and are expanded to full storage on read.  Values
are written with 17 significant digits so a write/read round trip is exact.
"""

import numpy as np

from .errors import MatrixMarketError
from .sparse import SparseMatrix

__all__ = ["read_matrix_market", "write_matrix_market", "read_vector", "write_vector"]

_BANNER = "%%matrixmarket"


def _parse_header(line, lineno):
    tokens = line.strip().split()
    if len(tokens) != 5 or tokens[0].lower() != _BANNER:
        raise MatrixMarketError(f"bad header {line.strip()!r}", lineno)
    obj, fmt, field, symmetry = (t.lower() for t in tokens[1:])
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", lineno)
    if field != "real":
        raise MatrixMarketError(f"unsupported field {field!r} (only real)", lineno)
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(f"unsupported symmetry {symmetry!r}", lineno)
    return fmt, symmetry


def _data_lines(fh, start):
    """Yield (lineno, stripped) for non-comment, non-blank lines."""
    for lineno, raw in enumerate(fh, start=start):
        s = raw.strip()
        if not s or s.startswith("%"):
            continue
        yield lineno, s


def read_matrix_market(path):
    """Read a coordinate-format real matrix into a :class:`SparseMatrix`.

    Duplicate entries are summed.  Symmetric files may only contain entries
    on or below the diagonal.
    """
    with open(path, "r") as fh:
        header = fh.readline()
        fmt, symmetry = _parse_header(header, 1)
        if fmt != "coordinate":
            raise MatrixMarketError(f"unsupported format {fmt!r} (only coordinate)", 1)
        lines = _data_lines(fh, 2)
        try:
            lineno, size = next(lines)
        except StopIteration:
            raise MatrixMarketError("missing size line", 2) from None
        parts = size.split()
        try:
            if len(parts) != 3:
                raise ValueError
            n_rows, n_cols, nnz = (int(p) for p in parts)
        except ValueError:
            raise MatrixMarketError(f"bad size line {size!r}", lineno) from None
        if min(n_rows, n_cols, nnz) < 0:
            raise MatrixMarketError("negative size", lineno)
        if symmetry == "symmetric" and n_rows != n_cols:
            raise MatrixMarketError("symmetric matrix must be square", lineno)

        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=np.float64)
        count = 0
        for lineno, s in lines:
            if count == nnz:
                raise MatrixMarketError("more entries than declared", lineno)
            parts = s.split()
            try:
                if len(parts) != 3:
                    raise ValueError
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise MatrixMarketError(f"bad entry {s!r}", lineno) from None
            if not (1 <= i <= n_rows and 1 <= j <= n_cols):
                raise MatrixMarketError(f"index ({i}, {j}) out of range", lineno)
            if not np.isfinite(v):
                raise MatrixMarketError(f"non-finite value {parts[2]!r}", lineno)
            if symmetry == "symmetric" and j > i:
                raise MatrixMarketError(
                    f"entry ({i}, {j}) above the diagonal in a symmetric file", lineno
                )
            rows[count], cols[count], vals[count] = i - 1, j - 1, v
            count += 1
        if count != nnz:
            raise MatrixMarketError(f"expected {nnz} entries, found {count}")

    if symmetry == "symmetric":
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    return SparseMatrix.from_coo(
        rows, cols, vals, (n_rows, n_cols), symmetric=symmetry == "symmetric"
    )


def write_matrix_market(A, path, comment=None):
    """Write ``A``; symmetric matrices are written as their lower triangle."""
    csr = A.to_scipy().tocoo()
    r, c, v = csr.row, csr.col, csr.data
    symmetry = "symmetric" if A.symmetric else "general"
    if A.symmetric:
        keep = r >= c
        r, c, v = r[keep], c[keep], v[keep]
    order = np.lexsort((r, c))  # column-major, as customary for the format
    with open(path, "w") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate real {symmetry}\n")
        if comment:
            for line in str(comment).splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{A.n_rows} {A.n_cols} {len(v)}\n")
        for k in order:
            fh.write(f"{r[k] + 1} {c[k] + 1} {v[k]:.16e}\n")


def write_vector(x, path):
    """Plain text, one value per line, 17 significant digits."""
    with open(path, "w") as fh:
        for value in np.asarray(x, dtype=np.float64):
            fh.write(f"{value:.16e}\n")


def read_vector(path):
    """Read a vector from plain text or a Matrix Market ``array`` file."""
    with open(path, "r") as fh:
        first = fh.readline()
        if first.lower().startswith(_BANNER):
            fmt, symmetry = _parse_header(first, 1)
            if fmt != "array" or symmetry != "general":
                raise MatrixMarketError("vector files must be 'array real general'", 1)
            lines = _data_lines(fh, 2)
            try:
                lineno, size = next(lines)
                m, ncol = (int(p) for p in size.split())
            except (StopIteration, ValueError):
                raise MatrixMarketError("bad array size line", 2) from None
            if ncol != 1:
                raise MatrixMarketError("vector arrays must have one column", lineno)
            out = []
            for lineno, s in lines:
                try:
                    out.append(float(s))
                except ValueError:
                    raise MatrixMarketError(f"bad value {s!r}", lineno) from None
            if len(out) != m:
                raise MatrixMarketError(f"expected {m} values, found {len(out)}")
            return np.array(out, dtype=np.float64)
        out = []
        for lineno, s in _data_lines([first] + fh.readlines(), 1):
            try:
                out.append(float(s))
            except ValueError:
                raise MatrixMarketError(f"bad value {s!r}", lineno) from None
        return np.array(out, dtype=np.float64)
