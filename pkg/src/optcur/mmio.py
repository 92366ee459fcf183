"""Matrix Market reader/writer.

Supports the coordinate (sparse) and array (dense) flavors with real or
integer fields and general or symmetric symmetry.  The parser reports the
offending line number on malformed input; the writer emits 17 significant
digits so round-trips are bit-exact for doubles.
"""

import numpy as np
import scipy.sparse

from .linalg import DenseMatrix, SparseMatrix, as_sparse, is_sparse


class MatrixMarketError(ValueError):
    def __init__(self, path, lineno, message):
        super().__init__("%s:%d: %s" % (path, lineno, message))
        self.path = path
        self.lineno = lineno


_FORMATS = ("coordinate", "array")
_FIELDS = ("real", "integer")
_SYMMETRIES = ("general", "symmetric")


def read_matrix(path):
    """Parse a Matrix Market file; coordinate files come back sparse."""
    with open(path, "r") as fh:
        lines = fh.readlines()
    if not lines:
        raise MatrixMarketError(path, 1, "empty file")
    banner = lines[0].split()
    if (len(banner) != 5 or banner[0] != "%%MatrixMarket"
            or banner[1].lower() != "matrix"):
        raise MatrixMarketError(path, 1, "malformed banner %r" % lines[0].strip())
    fmt, field, sym = (w.lower() for w in banner[2:5])
    if fmt not in _FORMATS:
        raise MatrixMarketError(path, 1, "unsupported format %r" % fmt)
    if field not in _FIELDS:
        raise MatrixMarketError(path, 1, "unsupported field %r" % field)
    if sym not in _SYMMETRIES:
        raise MatrixMarketError(path, 1, "unsupported symmetry %r" % sym)

    # skip comments
    ln = 1
    while ln < len(lines) and lines[ln].lstrip().startswith("%"):
        ln += 1
    if ln >= len(lines):
        raise MatrixMarketError(path, ln + 1, "missing size line")
    size = lines[ln].split()
    ln += 1

    if fmt == "coordinate":
        if len(size) != 3:
            raise MatrixMarketError(path, ln, "coordinate size line needs 3 fields")
        try:
            m, n, nnz = (int(w) for w in size)
        except ValueError:
            raise MatrixMarketError(path, ln, "non-integer size line")
        rows, cols, vals = [], [], []
        for off in range(nnz):
            if ln + off >= len(lines):
                raise MatrixMarketError(path, len(lines) + 1,
                                        "expected %d entries, file ended" % nnz)
            parts = lines[ln + off].split()
            if len(parts) != 3:
                raise MatrixMarketError(path, ln + off + 1,
                                        "entry needs 'row col value'")
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise MatrixMarketError(path, ln + off + 1,
                                        "unparseable entry %r" % lines[ln + off].strip())
            if not (1 <= i <= m and 1 <= j <= n):
                raise MatrixMarketError(path, ln + off + 1,
                                        "index (%d, %d) out of range" % (i, j))
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(v)
            if sym == "symmetric" and i != j:
                rows.append(j - 1)
                cols.append(i - 1)
                vals.append(v)
        mat = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(m, n))
        return SparseMatrix(mat.tocsr())

    if len(size) != 2:
        raise MatrixMarketError(path, ln, "array size line needs 2 fields")
    try:
        m, n = (int(w) for w in size)
    except ValueError:
        raise MatrixMarketError(path, ln, "non-integer size line")
    count = m * n if sym == "general" else m * (m + 1) // 2
    vals = []
    for off in range(count):
        if ln + off >= len(lines):
            raise MatrixMarketError(path, len(lines) + 1,
                                    "expected %d values, file ended" % count)
        try:
            vals.append(float(lines[ln + off]))
        except ValueError:
            raise MatrixMarketError(path, ln + off + 1,
                                    "unparseable value %r" % lines[ln + off].strip())
    a = np.zeros((m, n))
    if sym == "general":
        # column-major per the format spec
        a = np.array(vals).reshape((n, m)).T
    else:
        pos = 0
        for j in range(n):
            for i in range(j, m):
                a[i, j] = vals[pos]
                a[j, i] = vals[pos]
                pos += 1
    return DenseMatrix(a)


def write_matrix(path, mat):
    """Write dense matrices in array flavor, sparse in coordinate flavor."""
    if is_sparse(mat):
        csr = as_sparse(mat)
        coo = csr.tocoo()
        with open(path, "w") as fh:
            fh.write("%%MatrixMarket matrix coordinate real general\n")
            fh.write("%d %d %d\n" % (coo.shape[0], coo.shape[1], coo.nnz))
            for i, j, v in zip(coo.row, coo.col, coo.data):
                fh.write("%d %d %.17g\n" % (i + 1, j + 1, v))
        return
    a = np.asarray(mat, dtype=np.float64)
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix array real general\n")
        fh.write("%d %d\n" % a.shape)
        for j in range(a.shape[1]):
            for i in range(a.shape[0]):
                fh.write("%.17g\n" % a[i, j])
