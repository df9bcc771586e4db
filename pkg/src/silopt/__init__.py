"""Clustering by direct optimization of the average silhouette width."""

from .core import Dataset, DissimilarityMatrix, Partition, ValidationError, partition_from_labels, validate_dissimilarity
from .silhouette import MoveState, SilhouetteProfile, asw, silhouette_profile
from .optimize import FosilOptions, OptimizeResult, OsilOptions, fosil, osil, osil_fixed_k, pamsil
from .evaluation import KSweepResult, SimSummary, ari, local_optima, run_simulation, sweep

__version__ = "0.1.0"

__all__ = [
    "Dataset", "DissimilarityMatrix", "Partition", "ValidationError", "partition_from_labels",
    "validate_dissimilarity", "MoveState", "SilhouetteProfile", "asw", "silhouette_profile",
    "FosilOptions", "OptimizeResult", "OsilOptions", "fosil", "osil", "osil_fixed_k", "pamsil",
    "KSweepResult", "SimSummary", "ari", "local_optima", "run_simulation", "sweep",
]
