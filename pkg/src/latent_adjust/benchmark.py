"""Replicated simulation runs scored by pooled AUC and precision."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .baselines import eigenstrat, oracle_regress, raw_regress, sva
from .evaluation import precision_at, roc_auc
from .pipeline import LeappConfig, leapp
from .simgen import SimScenario, generate

METHODS = ("oracle", "leapp", "raw", "sva", "eigenstrat")
THREADS_ENV = "LATENT_ADJUST_THREADS"


def run_method(method: str, Y, design, truth, k: int):
    if method == "leapp":
        return leapp(Y, design, LeappConfig(k=k))[0]
    if method == "raw":
        return raw_regress(Y, design)
    if method == "oracle":
        return oracle_regress(Y, design, truth.latent)
    if method == "eigenstrat":
        return eigenstrat(Y, design, k)
    if method == "sva":
        return sva(Y, design, k)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class ReplicateOutput:
    replicate: int
    truth: np.ndarray
    t_stats: dict = field(default_factory=dict)
    p_values: dict = field(default_factory=dict)


def run_replicate(
    sc: SimScenario, replicate: int, methods: Sequence[str] = METHODS, gamma_key: int | None = None
) -> ReplicateOutput:
    Y, design, truth = generate(sc, replicate, gamma_key=gamma_key)
    out = ReplicateOutput(replicate, truth.nonnull_mask.copy())
    for m in methods:
        res = run_method(m, Y, design, truth, sc.k)
        out.t_stats[m] = np.asarray(res.t_stat)
        out.p_values[m] = np.asarray(res.p_value)
    return out


def _job(args):
    return run_replicate(*args)


def worker_count() -> int:
    cap = os.environ.get(THREADS_ENV)
    n = os.cpu_count() or 1
    return max(1, min(n, int(cap))) if cap else n


def run_replicates(
    sc: SimScenario,
    reps: int,
    methods: Sequence[str] = METHODS,
    workers: int | None = None,
    progress: Callable[[int, int], None] | None = None,
    shared_gamma: bool = False,
) -> list[ReplicateOutput]:
    """Run ``reps`` replicates; output order is by replicate regardless of workers.

    With ``shared_gamma`` every replicate reuses one effect vector (as for
    several tissues measured on the same genes).
    """
    workers = worker_count() if workers is None else workers
    gkey = 0 if shared_gamma else None
    jobs = [(sc, r, tuple(methods), gkey) for r in range(reps)]
    results = []
    if workers > 1 and reps > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, res in enumerate(pool.map(_job, jobs)):
                results.append(res)
                if progress:
                    progress(i + 1, reps)
    else:
        for i, job in enumerate(jobs):
            results.append(_job(job))
            if progress:
                progress(i + 1, reps)
    return results


def summarize(results: Iterable[ReplicateOutput], methods: Sequence[str], H: int = 50) -> dict:
    """Pooled AUC and mean precision@H per method."""
    results = list(results)
    truth = np.concatenate([r.truth for r in results])
    summary = {}
    for m in methods:
        scores = np.concatenate([np.abs(r.t_stats[m]) for r in results])
        prec = np.mean([precision_at(np.abs(r.t_stats[m]), r.truth, H) for r in results])
        summary[m] = {"auc": roc_auc(scores, truth)[1], "precision_at_50": float(prec)}
    return summary


def scenario_grid(base: SimScenario, snrs, lnrs, rhos) -> list[SimScenario]:
    return [
        replace(base, snr=float(a), lnr=float(b), rho=float(c))
        for a in snrs
        for b in lnrs
        for c in rhos
    ]
