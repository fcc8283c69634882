"""Hard-threshold Theta-IPOD: regression with sparse mean-shift outliers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import InsufficientDF, LatentAdjustError, _frozen

MAD_SCALE = 1.4826


class SingularDesign(LatentAdjustError, ValueError):
    pass


class EmptyGrid(LatentAdjustError, ValueError):
    pass


class ZeroSpread(LatentAdjustError, ValueError):
    pass


@dataclass(frozen=True)
class IpodFit:
    coef: np.ndarray
    gamma: np.ndarray
    lam: float
    bic: float
    iterations: int
    converged: bool

    def __post_init__(self):
        object.__setattr__(self, "coef", _frozen(self.coef))
        object.__setattr__(self, "gamma", _frozen(self.gamma))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.gamma)


def hard_threshold(x: np.ndarray, lam: float) -> np.ndarray:
    """Keep entries with ``|x| > lam``, zero the rest."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) > lam, x, 0.0)


def mad_scale(r: np.ndarray) -> float:
    """Median absolute deviation from the median, scaled by 1.4826."""
    r = np.asarray(r, dtype=float).ravel()
    if r.size < 2:
        raise ValueError("mad_scale needs at least two values")
    mad = MAD_SCALE * np.median(np.abs(r - np.median(r)))
    if mad <= 0:
        raise ZeroSpread("median absolute deviation is zero")
    return float(mad)


def tau_nonsparse(n: int, s: int, k: int) -> float:
    """Noise scale ``sqrt((n-s-k-1)/(n-s-k-3))`` for use when effects are not sparse."""
    dof = n - s - k
    if dof <= 3:
        raise InsufficientDF(f"n - s - k = {dof} must exceed 3")
    return float(np.sqrt((dof - 1) / (dof - 3)))


class _Projector:
    """Hat-matrix products for a fixed design without forming the N x N matrix."""

    def __init__(self, U: np.ndarray):
        U = np.asarray(U, dtype=float)
        if U.ndim == 1:
            U = U[:, None]
        N, k = U.shape
        if k >= N:
            raise SingularDesign(f"need k < N, got k={k}, N={N}")
        self.U = U
        if k:
            Q, R = np.linalg.qr(U)
            d = np.abs(np.diag(R))
            if d.max() == 0 or d.min() <= 1e-12 * d.max():
                raise SingularDesign("regressor matrix is not of full column rank")
            self.Q, self.R = Q, R
        else:
            self.Q = np.zeros((N, 0))
            self.R = np.zeros((0, 0))

    def hat(self, v: np.ndarray) -> np.ndarray:
        return self.Q @ (self.Q.T @ v)

    def coef(self, v: np.ndarray) -> np.ndarray:
        if not self.R.size:
            return np.zeros(0)
        return np.linalg.solve(self.R, self.Q.T @ v)


def theta_ipod(
    y: np.ndarray,
    U: np.ndarray,
    lam: float,
    tol: float = 1e-6,
    max_iter: int = 500,
    gamma0: Optional[np.ndarray] = None,
    _proj: Optional[_Projector] = None,
) -> IpodFit:
    """Fit ``y = U coef + gamma + noise`` with hard-thresholded ``gamma``.

    Iterates ``gamma <- Theta(H gamma + (I - H) y; lam)`` where ``H`` is the hat
    matrix of ``U``, then fits ``coef`` by least squares on ``y - gamma``.
    """
    y = np.asarray(y, dtype=float).ravel()
    proj = _proj if _proj is not None else _Projector(U)
    resid_y = y - proj.hat(y)
    gamma = np.zeros_like(y) if gamma0 is None else np.asarray(gamma0, dtype=float).copy()
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        new = hard_threshold(proj.hat(gamma) + resid_y, lam)
        step = np.max(np.abs(new - gamma)) if y.size else 0.0
        gamma = new
        if step < tol:
            converged = True
            break
    coef = proj.coef(y - gamma)
    return IpodFit(coef, gamma, float(lam), np.nan, it, converged)


def _ebic(y, U, fit: IpodFit, gamma_ebic: float = 1.0) -> float:
    N = y.size
    r = y - U @ fit.coef - fit.gamma
    rss = max(float(r @ r), 1e-300)
    m = fit.support.size
    return N * np.log(rss / N) + m * (1.0 + 2.0 * gamma_ebic) * np.log(N)


def default_grid(y: np.ndarray, U: np.ndarray, size: int = 40) -> np.ndarray:
    """Log-spaced lambdas from 5 down to 0.5 times the MAD of the OLS residuals."""
    proj = _Projector(U)
    scale = mad_scale(y - proj.hat(y))
    return np.geomspace(5.0 * scale, 0.5 * scale, size)


def select_lambda(
    y: np.ndarray,
    U: np.ndarray,
    grid: Optional[Sequence[float]] = None,
    tol: float = 1e-6,
    max_iter: int = 500,
) -> IpodFit:
    """Run :func:`theta_ipod` along a decreasing lambda path and pick by extended BIC.

    Each fit is warm-started from the previous one. Fits flagging more than
    half of the observations as outliers are not eligible.
    """
    y = np.asarray(y, dtype=float).ravel()
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    if grid is None:
        grid = default_grid(y, U)
    grid = np.sort(np.asarray(grid, dtype=float))[::-1]
    if grid.size == 0:
        raise EmptyGrid("lambda grid is empty")
    proj = _Projector(U)
    N = y.size
    best = None
    gamma = None
    for lam in grid:
        fit = theta_ipod(y, U, lam, tol, max_iter, gamma0=gamma, _proj=proj)
        gamma = np.array(fit.gamma)
        if fit.support.size > N / 2:
            continue
        bic = _ebic(y, U, fit)
        fit = IpodFit(fit.coef, fit.gamma, fit.lam, bic, fit.iterations, fit.converged)
        if best is None or bic < best.bic:
            best = fit
    if best is None:
        # every lambda saturated; fall back to the most conservative fit
        fit = theta_ipod(y, U, grid[0], tol, max_iter, _proj=proj)
        best = IpodFit(fit.coef, fit.gamma, fit.lam, _ebic(y, U, fit), fit.iterations, fit.converged)
    return best
