"""Comparator methods: raw regression, oracle, EIGENSTRAT-style and SVA-style."""

from __future__ import annotations

import logging

import numpy as np
from scipy import stats

from .core import (
    DimensionMismatch,
    GeneResult,
    InvalidRank,
    RankDeficientCovariates,
    StudyDesign,
    as_data_matrix,
    validate,
)

logger = logging.getLogger(__name__)


def _ols_tstats(Y: np.ndarray, D: np.ndarray, col: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient and t statistic of design column ``col`` for every row of ``Y``."""
    n, p = D.shape
    df = n - p
    if df <= 0:
        raise InvalidRank(f"no residual degrees of freedom (n={n}, p={p})")
    Q, R = np.linalg.qr(D)
    d = np.abs(np.diag(R))
    if d.min() <= 1e-10 * d.max():
        raise RankDeficientCovariates("design matrix is rank deficient")
    B = np.linalg.solve(R, Q.T @ Y.T)  # p x N
    resid = Y - (D @ B).T
    s2 = np.sum(resid**2, axis=1) / df
    Rinv = np.linalg.inv(R)
    var_col = np.sum(Rinv[col] ** 2)  # [(D'D)^-1]_{col,col}
    coef = B[col]
    se = np.sqrt(s2 * var_col)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, coef / se, np.where(coef == 0, 0.0, np.sign(coef) * np.inf))
    return coef, t


def _design(d: StudyDesign, extra: np.ndarray | None = None) -> np.ndarray:
    cols = [d.g[:, None], d.X]
    if extra is not None:
        cols.append(extra)
    return np.hstack(cols)


def raw_regress(Y, design: StudyDesign) -> GeneResult:
    """Per-gene OLS of ``Y`` on ``(g, X)``, ignoring latent structure."""
    Y = as_data_matrix(Y)
    validate(Y, design)
    d = design.normalized()
    coef, t = _ols_tstats(Y.values, _design(d))
    return GeneResult.from_stats(t, meta={"method": "raw", "coef": coef})


def oracle_regress(Y, design: StudyDesign, truth_latent) -> GeneResult:
    """Raw regression after subtracting the true latent term ``U V'``."""
    Y = as_data_matrix(Y)
    L = np.asarray(truth_latent, dtype=float)
    if np.ndim(L) == 0 and L == 0:
        L = np.zeros_like(Y.values)
    if L.shape != Y.values.shape:
        raise DimensionMismatch(f"latent term has shape {L.shape}, Y has {Y.values.shape}")
    res = raw_regress(Y.values - L, design)
    return GeneResult.from_stats(res.t_stat, meta=dict(res.meta, method="oracle"))


def _check_rank(k: int, d: StudyDesign) -> None:
    if not 1 <= k <= d.n - d.s - 2:
        raise InvalidRank(f"k={k} outside [1, n-s-2={d.n - d.s - 2}]")


def _top_right_vectors(M: np.ndarray, k: int) -> np.ndarray:
    Mc = M - M.mean(axis=1, keepdims=True)
    return np.linalg.svd(Mc, full_matrices=False)[2][:k].T


def eigenstrat(Y, design: StudyDesign, k: int) -> GeneResult:
    """Regress each gene on ``g`` and ``X`` plus the top ``k`` principal
    components of the row-centered data."""
    Y = as_data_matrix(Y)
    validate(Y, design)
    d = design.normalized()
    _check_rank(k, d)
    V = _top_right_vectors(Y.values, k)
    coef, t = _ols_tstats(Y.values, _design(d, V))
    return GeneResult.from_stats(t, meta={"method": "eigenstrat", "k": k, "coef": coef})


def _f_pvalues(Y: np.ndarray, full: np.ndarray, reduced: np.ndarray) -> np.ndarray:
    """Per-row F-test p-values for nested linear models."""
    n = Y.shape[1]

    def rss(D):
        if D.shape[1] == 0:
            return np.sum(Y**2, axis=1)
        B, *_ = np.linalg.lstsq(D, Y.T, rcond=None)
        return np.sum((Y - (D @ B).T) ** 2, axis=1)

    p1, p0 = full.shape[1], reduced.shape[1]
    r1, r0 = rss(full), rss(reduced)
    df1, df2 = p1 - p0, n - p1
    F = ((r0 - r1) / df1) / (r1 / df2)
    return stats.f.sf(np.maximum(F, 0.0), df1, df2)


def storey_pi0(p: np.ndarray, lam: float = 0.5) -> float:
    return float(min(1.0, np.mean(p > lam) / (1.0 - lam)))


def prob_nonnull(p: np.ndarray, bins: int = 20, lam: float = 0.5) -> np.ndarray:
    """Empirical-Bayes probability that each test is non-null.

    Local fdr is ``pi0 / f(p)`` with ``f`` a histogram density of the p-values,
    forced nondecreasing in ``p`` and capped at 1.
    """
    p = np.asarray(p, dtype=float)
    pi0 = storey_pi0(p, lam)
    counts, edges = np.histogram(p, bins=bins, range=(0.0, 1.0))
    density = counts / (p.size / bins)
    with np.errstate(divide="ignore"):
        lfdr_bins = np.where(density > 0, pi0 / density, 1.0)
    lfdr_bins = np.minimum(np.maximum.accumulate(np.minimum(lfdr_bins, 1.0)), 1.0)
    idx = np.clip(np.searchsorted(edges, p, side="right") - 1, 0, bins - 1)
    return 1.0 - lfdr_bins[idx]


def sva_weights(Y: np.ndarray, d: StudyDesign, V: np.ndarray) -> np.ndarray:
    """Weights estimating Pr(gamma_i = 0, U_i != 0 | data).

    The primary test conditions on the surrogate variables; the latent test
    compares ``(X, V)`` against ``X`` alone, without ``g``.
    """
    p_primary = _f_pvalues(Y, _design(d, V), np.hstack([d.X, V]))
    p_latent = _f_pvalues(Y, np.hstack([d.X, V]), d.X)
    return (1.0 - prob_nonnull(p_primary)) * prob_nonnull(p_latent)


def _subspace_change(A: np.ndarray, B: np.ndarray) -> float:
    # sign-aligned column difference
    signs = np.sign(np.sum(A * B, axis=0))
    signs[signs == 0] = 1.0
    return float(np.linalg.norm(A - B * signs))


def sva(Y, design: StudyDesign, k: int, max_outer: int = 20, tol: float = 1e-6) -> GeneResult:
    """Iteratively reweighted surrogate variable analysis.

    Surrogate variables start as the top right singular vectors of the
    residuals from the raw fit, then are refreshed from an SVD of ``Y`` with
    rows weighted by :func:`sva_weights`. The final test regresses each gene
    on ``g``, ``X`` and the surrogate variables.
    """
    Y = as_data_matrix(Y)
    validate(Y, design)
    d = design.normalized()
    _check_rank(k, d)
    Yv = Y.values
    D0 = _design(d)
    B, *_ = np.linalg.lstsq(D0, Yv.T, rcond=None)
    V = _top_right_vectors(Yv - (D0 @ B).T, k)

    converged = False
    it = 0
    w = np.ones(Yv.shape[0])
    for it in range(1, max_outer + 1):
        w = sva_weights(Yv, d, V)
        if not np.any(w > 0):
            logger.warning("sva: all weights vanished, keeping previous surrogates")
            break
        V_new = _top_right_vectors(Yv * w[:, None], k)
        change = _subspace_change(V_new, V)
        V = V_new
        if change < tol:
            converged = True
            break
    coef, t = _ols_tstats(Yv, _design(d, V))
    return GeneResult.from_stats(
        t, meta={"method": "sva", "k": k, "iterations": it, "converged": converged, "coef": coef}
    )
