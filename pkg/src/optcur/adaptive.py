"""Adaptive sampling: residual-norm column/row selection.

Randomized variants draw indices with probabilities proportional to squared
residual norms after projecting out an already-selected subspace.  Sparse
variants estimate those norms from a sign-sketched residual without ever
forming it.  Derandomized variants replace the i.i.d. draw by enumerating a
pairwise-independent hash family over a discretized distribution and keeping
the candidate set minimizing the true objective, which turns the expectation
bound into a guarantee.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from . import linalg
from .linalg import as_array, as_sparse, is_sparse
from .sketch import jlt_rows, make_sign_sketch

_ZERO_RTOL = 1e-13


@dataclass(frozen=True)
class ResidualDistribution:
    p: np.ndarray  # sums to 1
    alpha: float  # guaranteed floor factor vs the exact residual distribution
    uniform_fallback: bool  # residual was (numerically) zero


@dataclass(frozen=True)
class DiscreteDistribution:
    """p discretized to multiples of 1/(4n), except at the mode i*."""

    q: np.ndarray
    counts: np.ndarray  # integer grid counts, sum = 4n
    i_star: int
    grid: int  # 4n


@dataclass(frozen=True)
class PairwiseHashFamily:
    """h_{a,b}(x) = ((a x + b) mod p_hash) mod range, (a, b) in Z_p^2."""

    p_hash: int
    range: int

    @property
    def size(self):
        return self.p_hash * self.p_hash


def _col_sq_norms(a):
    if is_sparse(a):
        csr = as_sparse(a)
        return np.asarray(csr.multiply(csr).sum(axis=0)).ravel()
    a = as_array(a)
    return np.sum(a * a, axis=0)


def _row_sq_norms(a):
    if is_sparse(a):
        csr = as_sparse(a)
        return np.asarray(csr.multiply(csr).sum(axis=1)).ravel()
    a = as_array(a)
    return np.sum(a * a, axis=1)


def _dense_left_mult(x, a):
    """x @ a for dense x and possibly-sparse a, returning an ndarray."""
    if is_sparse(a):
        return np.asarray((as_sparse(a).T @ x.T).T)
    return x @ as_array(a)


def _normalize(sq_norms, total_ref):
    """Residual mass to a distribution; uniform when numerically zero."""
    sq = np.clip(sq_norms, 0.0, None)
    total = sq.sum()
    if total <= _ZERO_RTOL * max(total_ref, 1.0):
        n = sq.shape[0]
        return np.full(n, 1.0 / n), True
    return sq / total, False


def residual_col_distribution(a, v):
    """Exact column distribution of B = A - V V^+ A, via the Pythagorean split
    ||b_j||^2 = ||a_j||^2 - ||Q^T a_j||^2 with Q an orthonormal basis of V."""
    q = linalg.orthonormal_basis(v)
    proj = _dense_left_mult(q.T, a)
    sq = _col_sq_norms(a) - np.sum(proj * proj, axis=0)
    p, fallback = _normalize(sq, linalg.frobenius_sq(a))
    return ResidualDistribution(p=p, alpha=1.0, uniform_fallback=fallback)


def residual_row_distribution(a, r1):
    """Exact row distribution of B = A - A R1^+ R1."""
    q = linalg.row_space_projector_factor(as_array(r1))
    proj = as_sparse(a) @ q if is_sparse(a) else as_array(a) @ q
    proj = np.asarray(proj)
    sq = _row_sq_norms(a) - np.sum(proj * proj, axis=1)
    p, fallback = _normalize(sq, linalg.frobenius_sq(a))
    return ResidualDistribution(p=p, alpha=1.0, uniform_fallback=fallback)


def sketched_col_distribution(a, v, rng, beta=1.0):
    """Column distribution of the sketched residual S A - (S V)(V^+ A).

    Never forms the m x n residual; the sketch preserves each column norm
    within [1/2, 3/2] w.p. 1 - n^-beta, giving the 1/3 probability floor.
    """
    m, n = np.shape(a)
    s = make_sign_sketch(jlt_rows(n, beta), m, rng)
    sa = s.S @ as_sparse(a) if is_sparse(a) else s.S @ as_array(a)
    v = as_array(v)
    vpa = _dense_left_mult(np.asarray(linalg.pinv(v)), a)
    bt = np.asarray(sa) - (s.S @ v) @ vpa
    p, fallback = _normalize(np.sum(bt * bt, axis=0), linalg.frobenius_sq(a))
    return ResidualDistribution(p=p, alpha=1.0 / 3.0, uniform_fallback=fallback)


def sketched_row_distribution(a, r1, rng, beta=1.0):
    """Row distribution of B S^T = A S^T - A (R1^+ (R1 S^T))."""
    m, n = np.shape(a)
    s = make_sign_sketch(jlt_rows(m, beta), n, rng)
    r1 = as_array(r1)
    ast = as_sparse(a) @ s.S.T if is_sparse(a) else as_array(a) @ s.S.T
    inner = np.asarray(linalg.pinv(r1)) @ (r1 @ s.S.T)
    bst = np.asarray(ast) - np.asarray(
        as_sparse(a) @ inner if is_sparse(a) else as_array(a) @ inner)
    p, fallback = _normalize(np.sum(bst * bst, axis=1), linalg.frobenius_sq(a))
    return ResidualDistribution(p=p, alpha=1.0 / 3.0, uniform_fallback=fallback)


def _draw(dist, count, rng):
    return rng.choice(dist.p.shape[0], size=count, p=dist.p)


def adaptive_cols(a, v, alpha, c2, rng, probs=None):
    """c2 i.i.d. column draws from the residual distribution of A vs span(V).

    With the default alpha = 1 path the distribution is exactly proportional
    to squared residual column norms; a caller-supplied distribution must
    respect the alpha floor.
    """
    if c2 < 1:
        raise ValueError("c2 must be >= 1")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    dist = residual_col_distribution(a, v)
    if probs is not None:
        p = np.asarray(probs, dtype=np.float64)
        if np.any(p < alpha * dist.p - 1e-12) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("supplied distribution violates the alpha floor")
        dist = ResidualDistribution(p=p, alpha=alpha,
                                    uniform_fallback=dist.uniform_fallback)
    return _draw(dist, c2, rng)


def adaptive_rows(a, v, r1, r2, rng):
    """r2 i.i.d. row draws proportional to squared residual row norms."""
    if r2 < 1:
        raise ValueError("r2 must be >= 1")
    return _draw(residual_row_distribution(a, r1), r2, rng)


def adaptive_cols_sparse(a, v, c2, rng):
    """Column draws from the JLT-sketched residual; nnz-time, no m x n buffer."""
    if c2 < 1:
        raise ValueError("c2 must be >= 1")
    return _draw(sketched_col_distribution(a, v, rng), c2, rng)


def adaptive_rows_sparse(a, v, r1, r2, rng):
    """Row draws from the right-sketched residual; nnz-time, no m x n buffer."""
    if r2 < 1:
        raise ValueError("r2 must be >= 1")
    return _draw(sketched_row_distribution(a, r1, rng), r2, rng)


# ---------------------------------------------------------------------------
# derandomized variants


def discretize(p):
    """Round p to the 1/(4n) grid: half the mass stays put at the mode i*,
    every other mass is halved then rounded up, corrections charged to i*."""
    p = np.asarray(p, dtype=np.float64)
    n = p.shape[0]
    grid = 4 * n
    i_star = int(np.argmax(p))
    counts = np.ceil(p * (grid / 2.0) - 1e-12).astype(np.int64)
    counts[i_star] = 0
    counts[i_star] = grid - counts.sum()
    if counts[i_star] < grid // 4:
        raise linalg.NumericalError("mode mass fell below 1/4 after rounding")
    return DiscreteDistribution(q=counts / grid, counts=counts,
                                i_star=i_star, grid=grid)


def _next_prime(x):
    def is_prime(v):
        if v < 2:
            return False
        f = 2
        while f * f <= v:
            if v % f == 0:
                return False
            f += 1
        return True

    while not is_prime(x):
        x += 1
    return x


def hash_family(n):
    return PairwiseHashFamily(p_hash=_next_prime(4 * n), range=4 * n)


def family_candidates(fam, disc, draws):
    """Yield (a, b, indices): the draws of each family member, inverse-CDF
    mapped through the discretized distribution on an exact integer grid."""
    cum = np.cumsum(disc.counts)
    xs = np.arange(draws, dtype=np.int64)
    p = fam.p_hash
    for a in range(p):
        ax = (a * xs) % p
        for b in range(p):
            g = ((ax + b) % p) % fam.range
            yield a, b, np.searchsorted(cum, g, side="right")


def projection_objective(a, p_va, rows):
    """||A - (V V^+ A) R^+ R||_F^2 given the precomputed P = V V^+ A and the
    row block R, via the orthonormal row-space factor of R."""
    a = as_array(a)
    q = linalg.row_space_projector_factor(rows)
    aq = a @ q
    pq = p_va @ q
    return np.sum(a * a) - 2.0 * np.sum(aq * pq) + np.sum(pq * pq)


def adaptive_rows_d(a, v, r1, r2):
    """Deterministic row selection with the guaranteed bound

        ||A - VV^+A R^+R||^2 <= ||A - VV^+A||^2 + (4 rho / r2)||A - A R1^+R1||^2

    achieved by minimizing the true objective over the full hash family.
    """
    a = as_array(a)
    r1 = as_array(r1)
    m = a.shape[0]
    if not 1 <= r2 <= m:
        raise ValueError("need 1 <= r2 <= m")
    dist = residual_row_distribution(a, r1)
    if dist.uniform_fallback:
        return np.arange(r2)
    qv = linalg.orthonormal_basis(as_array(v))
    p_va = qv @ (qv.T @ a)
    disc = discretize(dist.p)
    fam = hash_family(m)
    cache = {}
    best = None
    for ha, hb, idx in family_candidates(fam, disc, r2):
        key = frozenset(idx.tolist())
        val = cache.get(key)
        if val is None:
            rows = np.vstack([r1, a[idx]])
            val = projection_objective(a, p_va, rows)
            cache[key] = val
        if best is None or val < best[0]:
            best = (val, idx)
    return best[1]


def adaptive_cols_d(a, v, c2, k):
    """Deterministic column selection: the row procedure on the transpose,
    with the rank-k truncation of A as the projection target."""
    a = as_array(a)
    a_k = np.asarray(linalg.truncate(linalg.svd(a), k))
    return adaptive_rows_d(a.T, a_k.T, as_array(v).T, c2)
