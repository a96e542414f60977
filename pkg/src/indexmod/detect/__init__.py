"""Detectors: exhaustive ML, greedy sparse recovery and the TAP-validating SR loop."""

from .algorithm import (
    SR_METHODS,
    DetectionResult,
    algorithm1_detect,
    ml_detect,
    nearest_slot_labels,
    nearest_slot_vector,
)
from .ml import ml_search
from .sparse import SparseEstimate, cosamp, least_squares, omp, omp_path, subspace_pursuit

__all__ = [
    "SR_METHODS",
    "DetectionResult",
    "SparseEstimate",
    "algorithm1_detect",
    "cosamp",
    "least_squares",
    "ml_detect",
    "ml_search",
    "nearest_slot_labels",
    "nearest_slot_vector",
    "omp",
    "omp_path",
    "subspace_pursuit",
]
