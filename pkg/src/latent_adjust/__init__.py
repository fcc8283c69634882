"""Latent effect adjustment after primary projection (LEAPP) and baselines."""

from .baselines import eigenstrat, oracle_regress, raw_regress, sva
from .core import DataMatrix, GeneResult, LatentEstimate, SimTruth, StudyDesign, validate
from .pipeline import LeappConfig, leapp
from .rank_estimate import RankConfig, parallel_analysis
from .simgen import SimScenario, generate

__all__ = [
    "DataMatrix",
    "GeneResult",
    "LatentEstimate",
    "LeappConfig",
    "RankConfig",
    "SimScenario",
    "SimTruth",
    "StudyDesign",
    "eigenstrat",
    "generate",
    "leapp",
    "oracle_regress",
    "parallel_analysis",
    "raw_regress",
    "sva",
    "validate",
]

__version__ = "0.1.0"
