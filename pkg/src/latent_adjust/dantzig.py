"""Dantzig-selector estimate of sparse primary effects given a latent direction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .core import NotUnitVector, NumericalFailure, StudyDesign, _frozen
from .crisscross import estimate_latent
from .rotation import rotate_and_split


@dataclass(frozen=True)
class DantzigResult:
    gamma_hat: np.ndarray
    B: float
    feasible: bool

    def __post_init__(self):
        object.__setattr__(self, "gamma_hat", _frozen(self.gamma_hat))


def order_statistic_bound(u_star: np.ndarray, s: int) -> float:
    """Sum of the ``2s`` largest squared entries plus half the ``3s`` largest."""
    sq = np.sort(np.asarray(u_star, dtype=float) ** 2)[::-1]
    return float(sq[: 2 * s].sum() + 0.5 * sq[: 3 * s].sum())


def constraint_slack(y1, u_star, gamma, sigma) -> float:
    """``sigma sqrt(log N) - ||(I - u u')(y1 - gamma)||_inf`` (nonnegative when feasible)."""
    r = np.asarray(y1, dtype=float) - gamma
    r = r - u_star * (u_star @ r)
    return float(sigma * np.sqrt(np.log(r.size)) - np.max(np.abs(r)))


def dantzig_gamma(y1, u_star, sigma: float, s_assumed: int) -> DantzigResult:
    """Minimize ``||gamma||_1`` subject to
    ``||(I - u u')(y1 - gamma)||_inf <= sigma sqrt(log N)``.

    Solved as a linear program in ``(gamma+, gamma-)``. ``gamma = y1`` is always
    feasible, so a solver failure raises :class:`NumericalFailure`.
    """
    y1 = np.asarray(y1, dtype=float).ravel()
    u = np.asarray(u_star, dtype=float).ravel()
    N = y1.size
    if N < 2:
        raise ValueError("need N >= 2")
    if abs(np.linalg.norm(u) - 1.0) > 1e-8:
        raise NotUnitVector("u_star must have unit norm")
    t = sigma * np.sqrt(np.log(N))
    P = np.eye(N) - np.outer(u, u)
    Py = P @ y1
    A = np.block([[P, -P], [-P, P]])
    b = np.r_[Py + t, t - Py]
    res = linprog(np.ones(2 * N), A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    if res.status != 0:
        raise NumericalFailure(f"linear program failed: {res.message}")
    gamma = res.x[:N] - res.x[N:]
    feasible = constraint_slack(y1, u, gamma, sigma) >= -1e-7
    return DantzigResult(gamma, order_statistic_bound(u, s_assumed), bool(feasible))


def dantzig_from_data(Y, g, sigma: float, s_assumed: int, k: int = 1) -> DantzigResult:
    """Rotate, estimate ``U`` from the primary-free columns and run
    :func:`dantzig_gamma` on the first rotated column."""
    d = StudyDesign(g).normalized()
    rot = rotate_and_split(Y, d)
    U_hat = np.asarray(estimate_latent(rot, k).U_hat)[:, 0]
    return dantzig_gamma(rot.y_first, U_hat / np.linalg.norm(U_hat), sigma, s_assumed)
