"""Orthogonal rotation sending the primary variable to the first axis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import ortho_group

from .core import DimensionMismatch, NotUnitVector, StudyDesign, _frozen, as_data_matrix


@dataclass(frozen=True)
class RotatedData:
    """Rotated response and covariates, split into the primary column and the rest."""

    y_first: np.ndarray
    y_rest: np.ndarray
    x_first: np.ndarray
    x_rest: np.ndarray

    def __post_init__(self):
        for name in ("y_first", "y_rest", "x_first", "x_rest"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def N(self) -> int:
        return self.y_first.size

    @property
    def n(self) -> int:
        return self.y_rest.shape[1] + 1


def householder_for(g: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    """Householder reflection ``O = I - 2 kk'`` with ``O @ g == e1``.

    Returns the identity when ``g`` already equals ``e1``.
    """
    g = np.asarray(g, dtype=float).ravel()
    if abs(np.linalg.norm(g) - 1.0) > atol:
        raise NotUnitVector(f"g must have unit norm, got {np.linalg.norm(g):.6g}")
    n = g.size
    kappa = g.copy()
    kappa[0] -= 1.0
    size = np.linalg.norm(kappa)
    if size < 1e-12:
        return np.eye(n)
    kappa /= size
    return np.eye(n) - 2.0 * np.outer(kappa, kappa)


def random_rotation_fixing_e1(n: int, seed) -> np.ndarray:
    """Block-diagonal ``1 (+) Q`` with ``Q`` Haar-distributed on O(n-1)."""
    R = np.eye(n)
    if n > 2:
        R[1:, 1:] = ortho_group.rvs(n - 1, random_state=np.random.default_rng(seed))
    elif n == 2:
        R[1, 1] = -1.0 if np.random.default_rng(seed).random() < 0.5 else 1.0
    return R


def rotate_and_split(Y, design: StudyDesign, O: Optional[np.ndarray] = None) -> RotatedData:
    """Compute ``Y O'`` and ``X' O'`` and split off the first column.

    ``design.g`` must already be unit norm. ``O`` defaults to the Householder
    reflection for ``g``; any orthogonal ``O`` with ``O g = e1`` is accepted.
    """
    Y = as_data_matrix(Y).values
    if Y.shape[1] != design.n:
        raise DimensionMismatch(f"Y has {Y.shape[1]} columns, g has {design.n} entries")
    if O is None:
        O = householder_for(design.g)
    O = np.asarray(O, dtype=float)
    if O.shape != (design.n, design.n):
        raise DimensionMismatch(f"rotation has shape {O.shape}, expected {(design.n, design.n)}")
    Yr = Y @ O.T
    Xr = O @ design.X  # rows of X rotate like columns of Y
    return RotatedData(Yr[:, 0], Yr[:, 1:], Xr[0, :], Xr[1:, :])
