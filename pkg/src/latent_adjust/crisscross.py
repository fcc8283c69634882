"""Alternating standardization / covariate regression / truncated SVD.

Fits ``Y_rest = beta X_rest' + U V_rest' + Sigma E`` on the primary-free
columns, re-estimating the per-gene noise scale until it stabilizes.
"""

from __future__ import annotations

import logging

import numpy as np

from .core import InvalidRank, LatentEstimate, RankDeficientCovariates
from .rotation import RotatedData

logger = logging.getLogger(__name__)

SIGMA_FLOOR = 1e-10


def regress_covariates(Ys: np.ndarray, Xl: np.ndarray) -> np.ndarray:
    """Row-wise least-squares coefficients ``Ys Xl (Xl'Xl)^-1`` (N x s)."""
    Ys = np.asarray(Ys, dtype=float)
    Xl = np.asarray(Xl, dtype=float)
    if Xl.ndim == 1:
        Xl = Xl[:, None]
    s = Xl.shape[1]
    if s == 0:
        return np.zeros((Ys.shape[0], 0))
    gram = Xl.T @ Xl
    if np.linalg.matrix_rank(gram) < s:
        raise RankDeficientCovariates("covariates are rank deficient after rotation")
    return np.linalg.solve(gram, Xl.T @ Ys.T).T


def truncated_svd(E: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Best rank-``k`` factorization ``E ~ U_k V_k'`` with orthonormal ``V_k``.

    Singular values are folded into ``U_k``. Each column of ``V_k`` is signed so
    that its largest-magnitude entry is positive.
    """
    E = np.asarray(E, dtype=float)
    if not 1 <= k <= min(E.shape):
        raise InvalidRank(f"k={k} must lie in [1, {min(E.shape)}]")
    U, d, Vt = np.linalg.svd(E, full_matrices=False)
    Uk = U[:, :k] * d[:k]
    Vk = Vt[:k].T.copy()
    pivot = np.argmax(np.abs(Vk), axis=0)
    signs = np.sign(Vk[pivot, np.arange(k)])
    signs[signs == 0] = 1.0
    return Uk * signs, Vk * signs


def _floor_sigma(sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    low = sigma < SIGMA_FLOOR
    return np.where(low, SIGMA_FLOOR, sigma), low


def estimate_latent(
    rot: RotatedData, k: int, tol: float = 1e-4, max_iter: int = 100
) -> LatentEstimate:
    """Estimate ``beta``, ``U``, ``Sigma`` and ``V_rest`` from ``rot.y_rest``.

    Starting from ``Sigma = I``, each sweep standardizes the rows by the current
    ``sigma``, regresses out the covariates, takes a rank-``k`` truncated SVD of
    the residuals and resets ``sigma_i`` to the root mean square (divisor
    ``n - 1``) of the gene's unstandardized residual. Iteration stops once the
    relative L1 change in ``sigma`` falls below ``tol``.

    ``k = 0`` is accepted and skips the SVD (the covariate fit alone).
    Hitting ``max_iter`` is reported through ``converged=False``, not raised.
    """
    Yl = np.asarray(rot.y_rest, dtype=float)
    Xl = np.asarray(rot.x_rest, dtype=float)
    N, m = Yl.shape
    s = Xl.shape[1]
    if k < 0 or k > min(N, m):
        raise InvalidRank(f"k={k} must lie in [0, {min(N, m)}]")
    if m - s - k - 1 <= 0:
        raise InvalidRank(f"no residual degrees of freedom: n-1={m}, s={s}, k={k}")

    sigma = np.ones(N)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        Ys = Yl / sigma[:, None]
        beta_s = regress_covariates(Ys, Xl)
        resid = Ys - beta_s @ Xl.T
        if k:
            U_s, V_l = truncated_svd(resid, k)
            resid = resid - U_s @ V_l.T
        else:
            U_s, V_l = np.zeros((N, 0)), np.zeros((m, 0))
        sigma_new, _ = _floor_sigma(sigma * np.sqrt(np.sum(resid**2, axis=1) / m))
        change = np.sum(np.abs(sigma_new - sigma)) / np.sum(np.abs(sigma))
        if change < tol:
            converged = True
            break
        sigma = sigma_new
    if not converged:
        logger.warning("estimate_latent: no convergence after %d sweeps", max_iter)

    # sigma is the scale that produced beta_s / U_s, so the pair stays consistent
    sigma, floored = _floor_sigma(sigma)
    if floored.any():
        logger.warning("estimate_latent: %d genes at the sigma floor", int(floored.sum()))
    return LatentEstimate(
        beta_hat=beta_s * sigma[:, None],
        U_hat=U_s * sigma[:, None],
        sigma_hat=sigma,
        V_rest_hat=V_l,
        k=k,
        iterations=it,
        converged=converged,
        U_std=U_s,
        floored=floored | (sigma_new <= SIGMA_FLOOR),
    )
