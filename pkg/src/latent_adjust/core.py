"""Shared model types for Y = gamma g' + beta X' + U V' + Sigma E."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats


class LatentAdjustError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LatentAdjustError, ValueError):
    """Input data or design violates a documented invariant."""


class DimensionMismatch(ValidationError):
    pass


class RankDeficientCovariates(ValidationError):
    pass


class DegenerateDesign(ValidationError):
    pass


class NotUnitVector(ValidationError):
    pass


class InvalidRank(ValidationError):
    pass


class InsufficientDF(ValidationError):
    pass


class NumericalFailure(LatentAdjustError, ArithmeticError):
    """A numerical routine failed to produce a usable answer."""


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DataMatrix:
    """The N x n response matrix (rows are genes, columns are subjects)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise DimensionMismatch(f"Y must be 2-D, got shape {v.shape}")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class StudyDesign:
    """Primary variable ``g``, covariates ``X`` (n x s) and optional latent rank ``k``.

    ``g`` is used as given; call :meth:`normalized` to rescale it to unit norm.
    """

    g: np.ndarray
    X: Optional[np.ndarray] = None
    k: Optional[int] = None

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float).ravel()
        if self.X is None:
            X = np.zeros((g.size, 0))
        else:
            X = np.asarray(self.X, dtype=float)
            if X.ndim == 1:
                X = X[:, None]
        object.__setattr__(self, "g", _frozen(g))
        object.__setattr__(self, "X", _frozen(X))

    @property
    def n(self) -> int:
        return self.g.size

    @property
    def s(self) -> int:
        return self.X.shape[1]

    def normalized(self, center: bool = False) -> "StudyDesign":
        g = self.g - self.g.mean() if center else self.g
        norm = np.linalg.norm(g)
        if not np.isfinite(norm) or norm == 0:
            raise DegenerateDesign("primary variable g has zero norm")
        return StudyDesign(g / norm, self.X, self.k)


@dataclass(frozen=True)
class LatentEstimate:
    """Latent structure fitted on the primary-free columns.

    ``U_hat`` and ``beta_hat`` are on the data scale; ``U_std`` is the
    standardized ``U_hat / sigma_hat`` used as regressors for the primary column.
    """

    beta_hat: np.ndarray
    U_hat: np.ndarray
    sigma_hat: np.ndarray
    V_rest_hat: np.ndarray
    k: int
    iterations: int
    converged: bool
    U_std: np.ndarray = None
    floored: np.ndarray = None

    def __post_init__(self):
        for name in ("beta_hat", "U_hat", "sigma_hat", "V_rest_hat"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if self.U_std is None:
            object.__setattr__(self, "U_std", self.U_hat / self.sigma_hat[:, None])
        else:
            object.__setattr__(self, "U_std", _frozen(self.U_std))
        if self.floored is None:
            object.__setattr__(self, "floored", np.zeros(self.sigma_hat.size, bool))
        object.__setattr__(self, "floored", _frozen(self.floored, bool))


def rank_from_stats(t_stat: np.ndarray) -> np.ndarray:
    """1-based ranks by descending ``|t|``; ties go to the lower gene index."""
    t = np.abs(np.asarray(t_stat, dtype=float))
    order = np.argsort(-t, kind="stable")
    rank = np.empty(t.size, dtype=int)
    rank[order] = np.arange(1, t.size + 1)
    return rank


def two_sided_normal_p(t_stat: np.ndarray) -> np.ndarray:
    return 2.0 * stats.norm.sf(np.abs(t_stat))


@dataclass(frozen=True)
class GeneResult:
    """Per-gene test statistics with normal-reference p-values and ranks."""

    t_stat: np.ndarray
    p_value: np.ndarray = None
    gamma_hat: Optional[np.ndarray] = None
    tau_hat: Optional[float] = None
    rank: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.t_stat, dtype=float).ravel()
        object.__setattr__(self, "t_stat", _frozen(t))
        p = two_sided_normal_p(t) if self.p_value is None else self.p_value
        object.__setattr__(self, "p_value", _frozen(p))
        r = rank_from_stats(t) if self.rank is None else self.rank
        object.__setattr__(self, "rank", _frozen(r, int))
        if self.gamma_hat is not None:
            object.__setattr__(self, "gamma_hat", _frozen(self.gamma_hat))

    @classmethod
    def from_stats(cls, t_stat, **kwargs) -> "GeneResult":
        return cls(np.asarray(t_stat, dtype=float), **kwargs)


@dataclass(frozen=True)
class SimTruth:
    gamma: np.ndarray
    U: np.ndarray
    V: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        for name in ("gamma", "U", "V", "sigma"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def nonnull_mask(self) -> np.ndarray:
        return self.gamma != 0

    @property
    def latent(self) -> np.ndarray:
        """The N x n latent contribution U V'."""
        return self.U @ self.V.T


def as_data_matrix(Y) -> DataMatrix:
    return Y if isinstance(Y, DataMatrix) else DataMatrix(Y)


def validate(Y, design: StudyDesign, require_unit_g: bool = False) -> None:
    """Check the data and design against the model's invariants.

    Raises
    ------
    DimensionMismatch
        If ``g`` or ``X`` does not have one entry/row per column of ``Y``.
    RankDeficientCovariates
        If ``X`` does not have full column rank.
    DegenerateDesign
        If there are too few subjects, non-finite entries, or an invalid ``k``.
    """
    Y = as_data_matrix(Y)
    N, n = Y.values.shape
    if N < 1:
        raise DegenerateDesign("Y needs at least one row")
    if design.g.size != n:
        raise DimensionMismatch(f"g has length {design.g.size} but Y has {n} columns")
    if design.X.shape[0] != n:
        raise DimensionMismatch(f"X has {design.X.shape[0]} rows but Y has {n} columns")
    if n < 4:
        raise DegenerateDesign(f"need at least 4 subjects, got {n}")
    if not np.all(np.isfinite(Y.values)):
        raise DegenerateDesign("Y contains non-finite entries")
    if not (np.all(np.isfinite(design.g)) and np.all(np.isfinite(design.X))):
        raise DegenerateDesign("design contains non-finite entries")
    if np.linalg.norm(design.g) == 0:
        raise DegenerateDesign("primary variable g has zero norm")
    if require_unit_g and abs(np.linalg.norm(design.g) - 1.0) > 1e-12:
        raise NotUnitVector("g must have unit norm")
    s = design.s
    if s > n - 3:
        raise DegenerateDesign(f"too many covariates: s={s} > n-3={n - 3}")
    if s and np.linalg.matrix_rank(design.X) < s:
        raise RankDeficientCovariates("covariate matrix X is not of full column rank")
    if design.k is not None and not (0 <= design.k <= n - s - 2):
        raise DegenerateDesign(f"k={design.k} outside [0, n-s-2={n - s - 2}]")
