"""Randomized dimension reduction: sparse embeddings and sign sketches.

A sparse subspace embedding W maps R^n -> R^xi with exactly one +-1 per input
coordinate (a CountSketch); applying it costs one pass over the stored
nonzeros.  The sign sketch is the dense +-1/sqrt(s) Johnson-Lindenstrauss
map used for norm estimation.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .linalg import DenseMatrix, as_array, as_sparse, is_sparse


@dataclass(frozen=True)
class SparseEmbedding:
    """CountSketch operator W: xi x n, stored implicitly as (h, y)."""

    xi: int
    n: int
    h: np.ndarray  # bucket of each source index, values in [0, xi)
    y: np.ndarray  # signs, +-1

    def as_csr(self):
        return scipy.sparse.csr_matrix(
            (self.y.astype(np.float64), (self.h, np.arange(self.n))),
            shape=(self.xi, self.n),
        )


@dataclass(frozen=True)
class SignSketch:
    """Dense s x m matrix with entries +-1/sqrt(s)."""

    S: np.ndarray
    s: int
    beta: float


def make_sse(n, xi, rng):
    """Draw W with i.i.d. uniform buckets and signs."""
    if xi < 1:
        raise ValueError("xi must be >= 1")
    h = rng.integers(0, xi, size=n)
    y = rng.integers(0, 2, size=n) * 2 - 1
    return SparseEmbedding(xi=int(xi), n=int(n), h=h, y=y)


def apply_sse(w, a):
    """Compute W A (xi x cols), touching each stored nonzero of A once."""
    if is_sparse(a):
        csr = as_sparse(a)
        if w.n != csr.shape[0]:
            raise ValueError("embedding source dim %d != rows %d"
                             % (w.n, csr.shape[0]))
        return DenseMatrix((w.as_csr() @ csr).toarray())
    a = as_array(a)
    if w.n != a.shape[0]:
        raise ValueError("embedding source dim %d != rows %d" % (w.n, a.shape[0]))
    out = np.zeros((w.xi, a.shape[1]))
    np.add.at(out, w.h, w.y[:, None] * a)
    return DenseMatrix(out)


def apply_sse_compressed(w, a):
    """W A with all-zero bucket rows dropped.

    Row order is by bucket id.  Column norms and left singular vectors of the
    result match apply_sse exactly, which is all the norm-only and SVD-only
    consumers need; this keeps memory bounded by the number of occupied
    buckets (<= n) even when xi is huge.
    """
    buckets, compressed = np.unique(w.h, return_inverse=True)
    if is_sparse(a):
        csr = as_sparse(a)
        s = scipy.sparse.csr_matrix(
            (w.y.astype(np.float64), (compressed, np.arange(w.n))),
            shape=(buckets.size, w.n),
        )
        return (s @ csr).toarray()
    a = as_array(a)
    out = np.zeros((buckets.size, a.shape[1]))
    np.add.at(out, compressed, w.y[:, None] * a)
    return out


def make_sign_sketch(s, m, rng, scaled=True):
    signs = (rng.integers(0, 2, size=(s, m)) * 2 - 1).astype(np.float64)
    if scaled:
        signs /= np.sqrt(s)
    return SignSketch(S=signs, s=int(s), beta=0.0)


def jlt_rows(n, beta):
    """Sketch height preserving n squared norms within [1/2, 3/2] w.p. 1 - n^-beta."""
    return int(np.ceil(8.0 * (4.0 + 2.0 * beta) * np.log(n)))


def jlt(b, beta, rng):
    """S B with S a sign sketch sized to preserve all column norms of B."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    m, n = np.shape(b)
    if n < 2:
        raise ValueError("need at least 2 columns")
    s = jlt_rows(n, beta)
    sk = make_sign_sketch(s, m, rng)
    if is_sparse(b):
        return DenseMatrix(sk.S @ as_sparse(b))
    return DenseMatrix(sk.S @ as_array(b))
