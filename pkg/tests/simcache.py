"""Memoized simulation cells shared by the slow benchmark tests."""

from functools import lru_cache

import numpy as np

from latent_adjust.benchmark import METHODS, run_replicates, summarize
from latent_adjust.evaluation import auc
from latent_adjust.simgen import SimScenario

REPS = 100


@lru_cache(maxsize=None)
def cell(snr: float, lnr: float, rho: float, reps: int = REPS, n: int = 60):
    """Replicate outputs for one scenario with every method (k = 1 known)."""
    sc = SimScenario(n=n, snr=snr, lnr=lnr, rho=rho, seed=0)
    return tuple(run_replicates(sc, reps, METHODS, workers=1))


def pooled_auc(snr, lnr, rho, reps=REPS) -> dict:
    return {m: v["auc"] for m, v in summarize(cell(snr, lnr, rho, reps), METHODS).items()}


def per_replicate_auc(snr, lnr, rho, method, reps=REPS) -> np.ndarray:
    return np.array([auc(np.abs(r.t_stats[method]), r.truth) for r in cell(snr, lnr, rho, reps)])
