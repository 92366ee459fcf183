"""End-to-end CUR pipelines and decomposition evaluation.

All three variants follow the same proto-structure: an approximate SVD factor
gives leverage-style scores, a dual-set sparsification compresses the sampled
candidates to 4k columns, adaptive sampling tops the set up to c columns, a
rank-k factor inside the selected column span produces Z2, and the row side
mirrors the procedure against Z2.  The intersection matrix folds all scale
factors, so the emitted C and R hold raw columns/rows of A.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from . import adaptive, audit, linalg, subset_select, subspace
from .approx_svd import deterministic_svd, randomized_svd, sparse_svd
from .linalg import NumericalError, as_array, as_sparse, is_sparse
from .sketch import make_sse, apply_sse

VARIANTS = ("linear", "sparse", "deterministic")


@dataclass(frozen=True)
class CurConfig:
    k: int
    epsilon: float
    variant: str = "linear"
    seed: int = 0
    fidelity: str = "paper"  # paper | heuristic
    # constant overrides; None means the per-variant default
    c1: int = None
    c2: int = None
    h1: int = None
    h2: int = None
    r1: int = None
    r2: int = None
    xi_u: int = None
    retries: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must be in (0, 1]")
        if self.variant not in VARIANTS:
            raise ValueError("variant must be one of %s" % (VARIANTS,))
        if self.fidelity not in ("paper", "heuristic"):
            raise ValueError("fidelity must be 'paper' or 'heuristic'")

    def _adaptive_factor(self):
        if self.fidelity == "heuristic":
            return 8.0 * self.k / self.epsilon
        return {"linear": 1620.0, "sparse": 4820.0,
                "deterministic": 10.0}[self.variant] * self.k / self.epsilon

    @property
    def c1_val(self):
        return 4 * self.k if self.c1 is None else self.c1

    @property
    def c2_val(self):
        return int(np.ceil(self._adaptive_factor())) if self.c2 is None else self.c2

    @property
    def r1_val(self):
        return 4 * self.k if self.r1 is None else self.r1

    @property
    def r2_val(self):
        return int(np.ceil(self._adaptive_factor())) if self.r2 is None else self.r2

    @property
    def h1_val(self):
        if self.h1 is not None:
            return self.h1
        return int(np.ceil(16.0 * self.k * np.log(20.0 * self.k)))

    @property
    def h2_val(self):
        if self.h2 is not None:
            return self.h2
        return int(np.ceil(8.0 * self.k * np.log(20.0 * self.k)))

    @property
    def xi_u_val(self):
        if self.xi_u is not None:
            return self.xi_u
        return int(np.ceil(40.0 * self.k * self.k / (self.epsilon ** 2)))

    @property
    def c_total(self):
        return self.c1_val + self.c2_val

    @property
    def r_total(self):
        return self.r1_val + self.r2_val


@dataclass(frozen=True)
class CurDecomposition:
    col_indices: np.ndarray
    col_scales: np.ndarray
    row_indices: np.ndarray
    row_scales: np.ndarray
    C: np.ndarray  # m x c, raw columns of A
    U: np.ndarray  # c x r
    R: np.ndarray  # r x n, raw rows of A
    k: int
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class EvalReport:
    err_sq: float
    opt_sq: float
    ratio: float
    c: int
    r: int
    rank_u: int
    exact: bool

    def as_dict(self):
        return {"err_sq": self.err_sq, "opt_sq": self.opt_sq,
                "ratio": self.ratio, "c": self.c, "r": self.r,
                "rank_u": self.rank_u, "exact": self.exact}


def _check_dims(cfg, m, n):
    if cfg.c_total > n:
        raise ValueError(
            "config requires c = %d columns but A has only %d; "
            "use heuristic fidelity or overrides" % (cfg.c_total, n))
    if cfg.r_total > m:
        raise ValueError(
            "config requires r = %d rows but A has only %d" % (cfg.r_total, m))


def _right_svec_rank_ok(msmall, k):
    """Right singular vectors of the small leverage matrix, or None if the
    sampled matrix lost rank."""
    u, s, vt = scipy.linalg.svd(msmall, full_matrices=False)
    if s.size < k or s[k - 1] <= max(msmall.shape) * s[0] * linalg.RANK_RTOL:
        return None
    return vt[:k].T


def _step_arrays(sel):
    idx = np.array([i for i, _ in sel.steps], dtype=int)
    w = np.sqrt(np.array([t for _, t in sel.steps]))
    return idx, w


def _levered_bss_stage(z, pick_matrix, pair, r_bss, az, sparse_eps=None,
                       rng=None):
    """Shared column/row front end of the randomized pipelines.

    z: the factor whose row norms drove `pair`; pick_matrix: the sampled,
    rescaled slice of A (one sampled vector per column); az: A times z on the
    matching side.  Returns the stepped dual-set compression of the sampled
    set, or None when the sampled leverage matrix lost rank.
    """
    msmall = pair.pick_rows(z).T  # k x h
    v_m = _right_svec_rank_ok(msmall, z.shape[1])
    if v_m is None:
        return None
    resid = pick_matrix - az @ msmall  # E Omega D, one column per sample
    if sparse_eps is None:
        sel = subset_select.bss_sampling(v_m, resid.T, r_bss)
    else:
        sel = subset_select.bss_sampling_sparse(v_m, resid.T, r_bss,
                                                sparse_eps, rng)
    step_idx, step_w = _step_arrays(sel)
    scaled = pick_matrix[:, step_idx] * step_w
    indices = pair.indices[step_idx]
    scales = pair.scales[step_idx] * step_w
    return scaled, indices, scales


def _intersection_matrix(sf, dtri, g_rpinv):
    """U = Psi^-1 Delta D^-1 (Z2^T A R^+), rank-aware in Psi."""
    core = scipy.linalg.solve_triangular(dtri, g_rpinv, lower=False)
    return linalg.solve_upper_rank_aware(sf.Psi, sf.Delta @ core)


def _scale_fold(u, col_scales, row_scales):
    """Fold the sampling scale factors into U so C and R stay raw."""
    return col_scales[:, None] * u * row_scales[None, :]


def cur_linear_time(a, cfg, rng=None):
    """Randomized linear-time CUR: leverage sampling + dual-set compression +
    adaptive sampling on both sides, exact subspace-restricted rank-k core."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    a = as_array(a)
    m, n = a.shape
    _check_dims(cfg, m, n)
    k = cfg.k
    diag = {"variant": "linear", "seed": cfg.seed, "fidelity": cfg.fidelity,
            "retries_used": 0, "stage_seconds": {}}

    t0 = time.time()
    z1 = randomized_svd(a, k, 1.0, rng).Z
    az1 = a @ z1
    diag["stage_seconds"]["approx_svd"] = time.time() - t0

    # column phase
    t0 = time.time()
    stage = None
    for _ in range(cfg.retries + 1):
        pair1 = subset_select.rand_sampling(z1, min(cfg.h1_val, n), 1.0, rng)
        aod = a[:, pair1.indices] * pair1.scales
        stage = _levered_bss_stage(z1, aod, pair1, cfg.c1_val, az1)
        if stage is not None:
            break
        diag["retries_used"] += 1
    if stage is None:
        raise NumericalError("leverage-sampled factor lost rank repeatedly")
    c1_scaled, c1_idx, c1_scales = stage
    diag["c1_residual_sq"] = _proj_residual_sq(a, c1_scaled)
    c2_idx = adaptive.adaptive_cols(a, c1_scaled, 1.0, cfg.c2_val, rng)
    col_idx = np.concatenate([c1_idx, c2_idx])
    col_scales = np.concatenate([c1_scales, np.ones(len(c2_idx))])
    c_scaled = np.hstack([c1_scaled, a[:, c2_idx]])
    diag["stage_seconds"]["columns"] = time.time() - t0

    # rank-k core within the column span
    t0 = time.time()
    sf = subspace.best_subspace_svd(a, c_scaled, k)
    z2, dtri = _qr_of_core(sf)
    diag["stage_seconds"]["subspace"] = time.time() - t0

    # row phase
    t0 = time.time()
    atz2 = a.T @ z2
    stage = None
    for _ in range(cfg.retries + 1):
        pair2 = subset_select.rand_sampling(z2, min(cfg.h2_val, m), 1.0, rng)
        aod = a[pair2.indices].T * pair2.scales
        stage = _levered_bss_stage(z2, aod, pair2, cfg.r1_val, atz2)
        if stage is not None:
            break
        diag["retries_used"] += 1
    if stage is None:
        raise NumericalError("row leverage factor lost rank repeatedly")
    r1_scaledT, r1_idx, r1_scales = stage
    r1_scaled = r1_scaledT.T
    r2_idx = adaptive.adaptive_rows(a, z2, r1_scaled, cfg.r2_val, rng)
    row_idx = np.concatenate([r1_idx, r2_idx])
    row_scales = np.concatenate([r1_scales, np.ones(len(r2_idx))])
    r_scaled = np.vstack([r1_scaled, a[row_idx[len(r1_idx):]]])
    diag["stage_seconds"]["rows"] = time.time() - t0

    t0 = time.time()
    g_rpinv = linalg.apply_right_pinv(z2.T @ a, r_scaled)
    u_scaled = _intersection_matrix(sf, dtri, g_rpinv)
    u = _scale_fold(u_scaled, col_scales, row_scales)
    diag["stage_seconds"]["intersection"] = time.time() - t0

    return CurDecomposition(
        col_indices=col_idx, col_scales=col_scales,
        row_indices=row_idx, row_scales=row_scales,
        C=a[:, col_idx], U=u, R=a[row_idx], k=k, diagnostics=diag)


def _qr_of_core(sf):
    f = linalg.qr(sf.Y @ sf.Delta)
    return f.Q, f.R_tri


def _proj_residual_sq(a, v):
    """||A - V V^+ A||_F^2 without forming the residual."""
    q = linalg.orthonormal_basis(v)
    if is_sparse(a):
        proj = np.asarray((as_sparse(a).T @ q).T)
    else:
        proj = q.T @ as_array(a)
    return linalg.frobenius_sq(a) - float(np.sum(proj * proj))


def cur_deterministic(a, cfg):
    """Deterministic CUR with the always-valid (1 + 8 eps) guarantee."""
    a = as_array(a)
    m, n = a.shape
    _check_dims(cfg, m, n)
    k = cfg.k
    diag = {"variant": "deterministic", "seed": cfg.seed,
            "fidelity": cfg.fidelity, "stage_seconds": {}}

    t0 = time.time()
    c1_scaled, c1_idx, c1_scales = deterministic_column_stage(a, k, cfg.c1_val)
    diag["c1_residual_sq"] = _proj_residual_sq(a, c1_scaled)
    c2_idx = adaptive.adaptive_cols_d(a, c1_scaled, cfg.c2_val, k)
    col_idx = np.concatenate([c1_idx, c2_idx])
    col_scales = np.concatenate([c1_scales, np.ones(len(c2_idx))])
    c_scaled = np.hstack([c1_scaled, a[:, c2_idx]])
    diag["stage_seconds"]["columns"] = time.time() - t0

    t0 = time.time()
    sf = subspace.best_subspace_svd(a, c_scaled, k)
    z2, dtri = _qr_of_core(sf)
    diag["stage_seconds"]["subspace"] = time.time() - t0

    t0 = time.time()
    e2t = a - z2 @ (z2.T @ a)  # = E2^T, one vector per row of A
    s2 = subset_select.bss_sampling(z2, e2t, cfg.r1_val)
    r1_idx, r1_scales = _step_arrays(s2)
    r1_scaled = a[r1_idx] * r1_scales[:, None]
    r2_idx = adaptive.adaptive_rows_d(a, z2, r1_scaled, cfg.r2_val)
    row_idx = np.concatenate([r1_idx, r2_idx])
    row_scales = np.concatenate([r1_scales, np.ones(len(r2_idx))])
    r_scaled = np.vstack([r1_scaled, a[r2_idx]])
    diag["stage_seconds"]["rows"] = time.time() - t0

    g_rpinv = linalg.apply_right_pinv(z2.T @ a, r_scaled)
    u = _scale_fold(_intersection_matrix(sf, dtri, g_rpinv),
                    col_scales, row_scales)
    return CurDecomposition(
        col_indices=col_idx, col_scales=col_scales,
        row_indices=row_idx, row_scales=row_scales,
        C=a[:, col_idx], U=u, R=a[row_idx], k=k, diagnostics=diag)


def deterministic_column_stage(a, k, c1):
    """The BSS column stage of the deterministic pipeline: Z1 from the exact
    rank-k factor, dual set = residual columns, c1 weighted picks."""
    a = as_array(a)
    z1 = deterministic_svd(a, k, 1.0).Z
    e1 = a - (a @ z1) @ z1.T
    s1 = subset_select.bss_sampling(z1, e1.T, c1)
    idx, scales = _step_arrays(s1)
    return a[:, idx] * scales, idx, scales


def cur_input_sparsity(a, cfg, rng=None):
    """Input-sparsity CUR: every stage works on sketches or sampled slices;
    no dense m x n intermediate is ever materialized."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    csr = as_sparse(a)
    m, n = csr.shape
    _check_dims(cfg, m, n)
    k = cfg.k
    eps = cfg.epsilon
    diag = {"variant": "sparse", "seed": cfg.seed, "fidelity": cfg.fidelity,
            "retries_used": 0, "stage_seconds": {}, "sketch_caps": []}

    t0 = time.time()
    z1 = sparse_svd(csr, k, 1.0, rng).Z
    az1 = np.asarray(csr @ z1)
    diag["stage_seconds"]["approx_svd"] = time.time() - t0

    # column phase
    t0 = time.time()
    stage = None
    for _ in range(cfg.retries + 1):
        pair1 = subset_select.rand_sampling(z1, min(cfg.h1_val, n), 1.0, rng)
        aod = csr[:, pair1.indices].toarray() * pair1.scales
        audit.note_dense(aod.size)
        stage = _levered_bss_stage(z1, aod, pair1, cfg.c1_val, az1,
                                   sparse_eps=0.5, rng=rng)
        if stage is not None:
            break
        diag["retries_used"] += 1
    if stage is None:
        raise NumericalError("leverage-sampled factor lost rank repeatedly")
    c1_scaled, c1_idx, c1_scales = stage
    diag["c1_residual_sq"] = _proj_residual_sq(csr, c1_scaled)
    c2_idx = adaptive.adaptive_cols_sparse(csr, c1_scaled, cfg.c2_val, rng)
    col_idx = np.concatenate([c1_idx, c2_idx])
    col_scales = np.concatenate([c1_scales, np.ones(len(c2_idx))])
    c_scaled = np.hstack([c1_scaled, csr[:, c2_idx].toarray()])
    audit.note_dense(c_scaled.size)
    diag["stage_seconds"]["columns"] = time.time() - t0

    t0 = time.time()
    sf = subspace.approx_subspace_svd(csr, c_scaled, k, eps, rng)
    if not sf.sketched:
        diag["sketch_caps"].append("subspace_svd_exact")
    z2, dtri = _qr_of_core(sf)
    diag["stage_seconds"]["subspace"] = time.time() - t0

    # row phase (mirror of the column phase against Z2)
    t0 = time.time()
    atz2 = np.asarray(csr.T @ z2)
    stage = None
    for _ in range(cfg.retries + 1):
        pair2 = subset_select.rand_sampling(z2, min(cfg.h2_val, m), 1.0, rng)
        aod = csr[pair2.indices].toarray().T * pair2.scales
        audit.note_dense(aod.size)
        stage = _levered_bss_stage(z2, aod, pair2, cfg.r1_val, atz2,
                                   sparse_eps=0.5, rng=rng)
        if stage is not None:
            break
        diag["retries_used"] += 1
    if stage is None:
        raise NumericalError("row leverage factor lost rank repeatedly")
    r1_scaledT, r1_idx, r1_scales = stage
    r1_scaled = r1_scaledT.T
    r2_idx = adaptive.adaptive_rows_sparse(csr, z2, r1_scaled, cfg.r2_val, rng)
    row_idx = np.concatenate([r1_idx, r2_idx])
    row_scales = np.concatenate([r1_scales, np.ones(len(r2_idx))])
    r_scaled = np.vstack([r1_scaled, csr[r2_idx].toarray()])
    audit.note_dense(r_scaled.size)
    diag["stage_seconds"]["rows"] = time.time() - t0

    # intersection matrix via sketched regression (exact when the prescribed
    # sketch width cannot compress the row dimension)
    t0 = time.time()
    xi_u = cfg.xi_u_val
    if xi_u >= m:
        diag["sketch_caps"].append("u_regression_exact")
        g_rpinv = linalg.apply_right_pinv(atz2.T, r_scaled)
        u_scaled = _intersection_matrix(sf, dtri, g_rpinv)
    else:
        w = make_sse(m, xi_u, rng)
        wc_core = apply_sse(w, c_scaled).data @ _core_map(sf, dtri)
        wa = apply_sse(w, csr).data
        audit.note_dense(wa.size)
        y_opt = np.asarray(linalg.pinv(wc_core)) @ \
            linalg.apply_right_pinv(wa, r_scaled)
        u_scaled = _core_map(sf, dtri) @ y_opt
    u = _scale_fold(u_scaled, col_scales, row_scales)
    diag["stage_seconds"]["intersection"] = time.time() - t0

    c_raw = csr[:, col_idx].toarray()
    r_raw = csr[row_idx].toarray()
    audit.note_dense(c_raw.size)
    audit.note_dense(r_raw.size)
    return CurDecomposition(
        col_indices=col_idx, col_scales=col_scales,
        row_indices=row_idx, row_scales=row_scales,
        C=c_raw, U=u, R=r_raw, k=k, diagnostics=diag)


def _core_map(sf, dtri):
    """Psi^-1 Delta D^-1: the map sending C to Z2 (C @ map = Z2)."""
    core = scipy.linalg.solve_triangular(
        dtri.T, sf.Delta.T, lower=True).T
    return linalg.solve_upper_rank_aware(sf.Psi, core)


def decompose(a, cfg, rng=None):
    """Dispatch on cfg.variant."""
    if cfg.variant == "linear":
        return cur_linear_time(a, cfg, rng)
    if cfg.variant == "sparse":
        return cur_input_sparsity(a, cfg, rng)
    return cur_deterministic(a, cfg)


def top_sigma_sq(a, k):
    """Sum of the top-k squared singular values (sparse-aware)."""
    if is_sparse(a):
        csr = as_sparse(a)
        if k < min(csr.shape) - 1:
            s = scipy.sparse.linalg.svds(csr, k=k,
                                         return_singular_vectors=False)
            return float(np.sum(s * s))
        a = csr.toarray()
    f = linalg.svd(a)
    return float(np.sum(f.sigma[:k] ** 2))


def optimal_residual_sq(a, k):
    """||A - A_k||_F^2."""
    return max(linalg.frobenius_sq(a) - top_sigma_sq(a, k), 0.0)


def cur_error_sq(a, dec):
    """||A - C U R||_F^2 without forming CUR at full density."""
    c = dec.C
    ur = dec.U @ dec.R
    if is_sparse(a):
        csr = as_sparse(a)
        cross = float(np.sum(np.asarray(csr.T @ c).T * ur))
        norm_cur = float(np.sum((c.T @ c) @ ur * ur))
        return linalg.frobenius_sq(a) - 2.0 * cross + norm_cur
    a = as_array(a)
    return float(np.sum((a - c @ ur) ** 2))


def evaluate(a, dec, opt_sq=None):
    """Exact error report for a decomposition."""
    err_sq = max(cur_error_sq(a, dec), 0.0)
    if opt_sq is None:
        opt_sq = optimal_residual_sq(a, dec.k)
    fro = linalg.frobenius_sq(a)
    exact = err_sq <= 1e-16 * max(fro, 1.0)
    if opt_sq > 0.0:
        ratio = err_sq / opt_sq
    else:
        ratio = 0.0 if exact else float("inf")
    rank_u = linalg.numerical_rank(dec.U)
    return EvalReport(err_sq=float(err_sq), opt_sq=float(opt_sq),
                      ratio=float(ratio), c=dec.C.shape[1], r=dec.R.shape[0],
                      rank_u=rank_u, exact=bool(exact))
