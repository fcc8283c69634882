"""Ranking quality metrics and multi-list resemblance curves."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import LatentAdjustError, ValidationError


class DegenerateTruth(ValidationError):
    pass


class ZeroVector(ValidationError):
    pass


class IndexMismatch(ValidationError):
    pass


def roc_curve(scores, truth) -> tuple[np.ndarray, np.ndarray]:
    """ROC points by descending score; tied scores enter as one step."""
    scores = np.asarray(scores, dtype=float).ravel()
    truth = np.asarray(truth, dtype=bool).ravel()
    if scores.size != truth.size:
        raise IndexMismatch("scores and truth differ in length")
    n_pos = int(truth.sum())
    n_neg = truth.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateTruth("truth needs at least one positive and one negative")
    order = np.argsort(-scores, kind="stable")
    s, t = scores[order], truth[order]
    last_of_group = np.r_[s[1:] != s[:-1], True]
    tp = np.cumsum(t)[last_of_group]
    fp = np.cumsum(~t)[last_of_group]
    return np.r_[0.0, fp / n_neg], np.r_[0.0, tp / n_pos]


def roc_auc(scores, truth) -> tuple[list[tuple[float, float]], float]:
    """ROC curve as ``(fpr, tpr)`` pairs and its trapezoidal area.

    Pooling replicates means concatenating their scores and truth first.
    """
    fpr, tpr = roc_curve(scores, truth)
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return list(zip(fpr.tolist(), tpr.tolist())), auc


def auc(scores, truth) -> float:
    return roc_auc(scores, truth)[1]


def mean_replicate_auc(scores: Sequence, truths: Sequence) -> float:
    """Average of per-replicate AUCs (the alternative to pooling)."""
    return float(np.mean([auc(s, t) for s, t in zip(scores, truths)]))


def precision_at(scores, truth, H: int = 50) -> float:
    """Fraction of true non-nulls among the ``H`` highest scores (index breaks ties)."""
    scores = np.asarray(scores, dtype=float).ravel()
    truth = np.asarray(truth, dtype=bool).ravel()
    if not 1 <= H <= scores.size:
        raise ValueError(f"H={H} must lie in [1, {scores.size}]")
    top = np.argsort(-scores, kind="stable")[:H]
    return float(truth[top].mean())


def angle_cosine(Uhat, U) -> float:
    """Absolute cosine of the angle between two vectors."""
    a = np.asarray(Uhat, dtype=float).ravel()
    b = np.asarray(U, dtype=float).ravel()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroVector("angle undefined for a zero vector")
    return float(min(1.0, abs(a @ b) / (na * nb)))


def resemblance_curve(pvals, alphas) -> list[tuple[float, int, int]]:
    """Pooled overlap of significant-gene lists across ``M`` datasets.

    For each ``alpha``, ``A_j`` is the set of genes with ``p_j <= alpha``;
    ``I`` sums ``|A_j & A_j'|`` over pairs ``j < j'`` and ``U`` is
    ``|A_1 | ... | A_M|``.

    ``pvals`` is a sequence of M vectors (or an N x M array, one column per list).
    """
    if isinstance(pvals, np.ndarray) and pvals.ndim == 2:
        P = pvals
    else:
        lists = [np.asarray(p, dtype=float).ravel() for p in pvals]
        if len({p.size for p in lists}) > 1:
            raise IndexMismatch("p-value lists have different lengths")
        P = np.column_stack(lists)
    if P.shape[1] < 2:
        raise ValidationError("need at least two p-value lists")
    alphas = np.asarray(alphas, dtype=float).ravel()
    order = np.argsort(alphas, kind="stable")

    # per-gene count of lists in which the gene is significant, updated event by event
    flat = P.ravel()
    genes = np.repeat(np.arange(P.shape[0]), P.shape[1])
    ev = np.argsort(flat, kind="stable")
    flat, genes = flat[ev], genes[ev]
    counts = np.zeros(P.shape[0], dtype=np.int64)
    I = U = 0
    pos = 0
    out = [None] * alphas.size
    for idx in order:
        a = alphas[idx]
        stop = np.searchsorted(flat, a, side="right")
        for gene in genes[pos:stop]:
            c = counts[gene]
            I += c  # new pairs formed with the lists already containing this gene
            U += c == 0
            counts[gene] = c + 1
        pos = max(pos, stop)
        out[idx] = (float(a), int(I), int(U))
    return out


def resemblance_until(pvals, u_max: int) -> list[tuple[float, int, int]]:
    """Resemblance rows at every distinct p-value, while ``U <= u_max``."""
    P = np.asarray(pvals, dtype=float)
    alphas = np.unique(P)
    rows = []
    for row in resemblance_curve(P, alphas):
        if row[2] > u_max:
            break
        rows.append(row)
    return rows
