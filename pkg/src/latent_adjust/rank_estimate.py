"""Permutation-based choice of the number of latent factors (parallel analysis)."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import LatentAdjustError

logger = logging.getLogger(__name__)


class DegenerateMatrix(LatentAdjustError, ValueError):
    pass


@dataclass(frozen=True)
class RankConfig:
    """Settings for :func:`parallel_analysis`.

    ``max_rank`` defaults to ``min(N, m) - 1`` for an N x m input.
    """

    n_permutations: int = 20
    significance_threshold: float = 0.1
    max_rank: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.significance_threshold < 1:
            raise ValueError("significance_threshold must be in (0, 1)")
        if self.n_permutations < 1:
            raise ValueError("n_permutations must be >= 1")


def _standardize_rows(R: np.ndarray) -> np.ndarray:
    Z = R - R.mean(axis=1, keepdims=True)
    return Z / Z.std(axis=1, keepdims=True)


def _permute_rows(Z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # independent shuffle of every row: argsort of iid uniforms is a uniform permutation
    idx = np.argsort(rng.random(Z.shape), axis=1)
    return np.take_along_axis(Z, idx, axis=1)


def parallel_analysis(R: np.ndarray, cfg: RankConfig = RankConfig()) -> int:
    """Estimate the number of significant factors in ``R``.

    Rows are standardized, then each observed singular value is compared with
    the ``1 - threshold`` quantile of the same-index singular value over
    matrices whose rows were independently permuted. Testing stops at the first
    index that is not significant.

    Rows with zero variance are dropped (with a warning); a matrix with fewer
    than two informative rows raises :class:`DegenerateMatrix`.
    """
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[1] < 2:
        raise DegenerateMatrix(f"need at least 2 columns, got shape {R.shape}")
    if not np.all(np.isfinite(R)):
        raise DegenerateMatrix("R contains non-finite entries")
    spread = R.std(axis=1)
    keep = spread > 1e-12 * max(1.0, float(np.abs(R).max()))
    if not keep.all():
        logger.warning("parallel_analysis: dropping %d zero-variance rows", int((~keep).sum()))
    if keep.sum() < 2:
        raise DegenerateMatrix("fewer than two rows with nonzero variance")
    Z = _standardize_rows(R[keep])

    max_rank = min(Z.shape) - 1 if cfg.max_rank is None else min(cfg.max_rank, min(Z.shape) - 1)
    if max_rank <= 0:
        return 0
    observed = np.linalg.svd(Z, compute_uv=False)[:max_rank]

    rng = np.random.default_rng(cfg.seed)
    null = np.empty((cfg.n_permutations, max_rank))
    for b in range(cfg.n_permutations):
        null[b] = np.linalg.svd(_permute_rows(Z, rng), compute_uv=False)[:max_rank]
    cutoff = np.quantile(null, 1.0 - cfg.significance_threshold, axis=0)

    k = 0
    while k < max_rank and observed[k] > cutoff[k]:
        k += 1
    return k
