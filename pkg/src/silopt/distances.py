"""Dissimilarities built from coordinate or presence/absence data."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from .core import Dataset, DissimilarityMatrix, ValidationError, validate_dissimilarity

METRICS = ("euclidean", "manhattan", "jaccard")


def _points(data) -> np.ndarray:
    X = data.points if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise ValidationError(f"expected an n x p array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("coordinates must be finite")
    return X


def euclidean(data) -> DissimilarityMatrix:
    X = _points(data)
    return validate_dissimilarity(cdist(X, X, "euclidean"))


def manhattan(data) -> DissimilarityMatrix:
    X = _points(data)
    return validate_dissimilarity(cdist(X, X, "cityblock"))


def jaccard_binary(data) -> DissimilarityMatrix:
    """``1 - |A & B| / |A | B|`` over presence sets; two all-zero rows are at 0."""
    B = _points(data)
    if not np.all((B == 0) | (B == 1)):
        raise ValidationError("jaccard_binary needs a 0/1 matrix")
    both = B @ B.T
    counts = B.sum(axis=1)
    union = counts[:, None] + counts[None, :] - both
    with np.errstate(invalid="ignore", divide="ignore"):
        d = np.where(union > 0, 1.0 - both / union, 0.0)
    np.fill_diagonal(d, 0.0)
    return validate_dissimilarity(d)


def compute(data, metric: str) -> DissimilarityMatrix:
    if metric == "euclidean":
        return euclidean(data)
    if metric == "manhattan":
        return manhattan(data)
    if metric == "jaccard":
        return jaccard_binary(data)
    raise ValidationError(f"unknown metric {metric!r}; choose from {METRICS}")
