"""Approximate SVD factor producers.

Each routine returns an orthonormal Z (n x k) with

    ||A - A Z Z^T||_F^2 <= (1 + eps) ||A - A_k||_F^2

under its own contract: exactly and deterministically, in expectation, or
with constant probability in o(dense-SVD) time.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from . import linalg
from .linalg import as_array, as_sparse, is_sparse
from .sketch import make_sse, apply_sse, make_sign_sketch


@dataclass(frozen=True)
class FactorZ:
    Z: np.ndarray  # n x k, orthonormal columns
    mode: str  # deterministic | randomized | sparse
    epsilon: float


def _top_right_singvecs(p, k):
    """Top-k right singular vectors of a dense matrix, always k columns."""
    _, _, vt = scipy.linalg.svd(p, full_matrices=False)
    if vt.shape[0] < k:
        raise linalg.NumericalError("projected matrix thinner than k")
    return vt[:k].T.copy()


def deterministic_svd(a, k, eps):
    """Z = top-k right singular vectors; deterministic, meets the bound with eps=0."""
    f = linalg.svd(a)
    if not 1 <= k < f.rank:
        raise ValueError("need 1 <= k < rank(A)")
    return FactorZ(Z=f.V_A[:, :k].copy(), mode="deterministic", epsilon=float(eps))


def randomized_svd(a, k, eps, rng):
    """Sketch-and-project: right sign sketch of width k + ceil(k/eps)."""
    if not 0 < eps <= 1:
        raise ValueError("eps must be in (0, 1]")
    m, n = np.shape(a)
    if not 2 <= k < min(m, n):
        raise ValueError("need 2 <= k < min(m, n)")
    p = k + int(np.ceil(k / eps))
    p = min(p, n)
    s = make_sign_sketch(p, n, rng, scaled=False)
    if is_sparse(a):
        csr = as_sparse(a)
        y = csr @ s.S.T
        q = scipy.linalg.qr(y, mode="economic")[0]
        proj = np.asarray((csr.T @ q).T)
    else:
        a = as_array(a)
        y = a @ s.S.T
        q = scipy.linalg.qr(y, mode="economic")[0]
        proj = q.T @ a
    return FactorZ(Z=_top_right_singvecs(proj, k), mode="randomized",
                   epsilon=float(eps))


def sparse_svd(a, k, eps, rng):
    """Top-k right singular directions of a CountSketch compression W A.

    Runtime is one pass over nnz(A) plus dense work on the xi x n sketch.
    When the prescribed xi would not compress (xi >= m) the sketch is skipped
    and the exact directions are computed iteratively, still in nnz-bounded
    passes.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must be in (0, 1]")
    csr = as_sparse(a)
    m, n = csr.shape
    if not 2 <= k < min(m, n):
        raise ValueError("need 2 <= k < min(m, n)")
    xi = int(np.ceil(40.0 * (k * k + k) / (eps * eps)))
    if xi >= m:
        _, s, vt = scipy.sparse.linalg.svds(
            csr, k=k, v0=rng.standard_normal(min(m, n)),
            return_singular_vectors="vh")
        z = vt[np.argsort(-s)].T.copy()
        return FactorZ(Z=z, mode="sparse", epsilon=float(eps))
    w = make_sse(m, xi, rng)
    wa = apply_sse(w, csr).data
    return FactorZ(Z=_top_right_singvecs(wa, k), mode="sparse",
                   epsilon=float(eps))
