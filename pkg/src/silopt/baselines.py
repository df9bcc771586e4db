"""Baseline clusterers: PAM, k-means and agglomerative linkage.

They serve as initializers for the ASW optimizers and as comparison methods
in the simulation harness.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.cluster import hierarchy
from scipy.spatial.distance import squareform
from sklearn.cluster import KMeans

from .core import Dataset, DissimilarityMatrix, Partition, ValidationError, as_dissimilarity

LINKAGE_METHODS = ("single", "average", "complete", "ward")


def _check_k(k, n, allow_n=False):
    upper = n if allow_n else n - 1
    if not 2 <= k <= upper:
        raise ValidationError(f"k={k} out of range 2..{upper} for n={n}")


# --------------------------------------------------------------------------- PAM


@dataclass(frozen=True)
class MedoidResult:
    partition: Partition
    medoids: np.ndarray
    objective: float
    swaps: int


def nearest_medoid_codes(d: np.ndarray, medoids: np.ndarray) -> np.ndarray:
    """Assign each object to its closest medoid; medoids keep their own slot."""
    codes = np.argmin(d[:, medoids], axis=1)
    codes[medoids] = np.arange(len(medoids))
    return codes


def pam_build(d: np.ndarray, k: int) -> np.ndarray:
    """Greedy BUILD phase: each new medoid gives the largest cost reduction."""
    first = int(np.argmin(d.sum(axis=0)))
    medoids = [first]
    nearest = d[:, first].copy()
    for _ in range(1, k):
        gain = np.maximum(nearest[:, None] - d, 0.0).sum(axis=0)
        gain[medoids] = -np.inf
        new = int(np.argmax(gain))
        medoids.append(new)
        nearest = np.minimum(nearest, d[:, new])
    return np.array(medoids)


def pam(d, k: int, seed: int | None = None, max_swaps: int = 10_000) -> MedoidResult:
    """Partitioning Around Medoids: BUILD followed by steepest-descent SWAP.

    ``seed`` is accepted for interface uniformity; the algorithm is
    deterministic (ties go to the lowest medoid slot / object index).
    """
    d = np.asarray(as_dissimilarity(d))
    n = d.shape[0]
    _check_k(k, n)
    medoids = pam_build(d, k)
    swaps = 0
    while swaps < max_swaps:
        dm = d[:, medoids]
        order = np.argsort(dm, axis=1, kind="stable")
        slot = order[:, 0]
        near = dm[np.arange(n), slot]
        second = dm[np.arange(n), order[:, 1]]
        # change in cost for swapping medoid slot m out for object h
        gain_other = np.minimum(d - near[:, None], 0.0)
        base = gain_other.sum(axis=0)
        delta = np.tile(base, (k, 1))
        for m in range(k):
            rows = slot == m
            if rows.any():
                own = np.minimum(d[rows], second[rows, None]) - near[rows, None]
                delta[m] += own.sum(axis=0) - gain_other[rows].sum(axis=0)
        delta[:, medoids] = np.inf
        m, h = np.unravel_index(np.argmin(delta), delta.shape)
        if delta[m, h] >= -1e-12 * max(1.0, near.sum()):
            break
        medoids = medoids.copy()
        medoids[m] = h
        swaps += 1
    codes = nearest_medoid_codes(d, medoids)
    objective = float(d[np.arange(n), medoids[codes]].sum())
    return MedoidResult(Partition.from_codes(codes, k), medoids, objective, swaps)


# ----------------------------------------------------------------------- k-means


def kmeans(data, k: int, restarts: int = 100, seed: int | None = None) -> Partition:
    """Lloyd k-means with k-means++ seeding, best of ``restarts`` starts.

    Needs coordinates; a dissimilarity matrix is rejected.
    """
    if isinstance(data, DissimilarityMatrix):
        raise ValidationError("k-means needs coordinate data, not a dissimilarity matrix")
    X = data.points if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise ValidationError("k-means needs a 2-d coordinate array")
    if restarts < 1:
        raise ValidationError("restarts must be at least 1")
    n = X.shape[0]
    _check_k(k, n, allow_n=True)
    model = KMeans(n_clusters=k, init="k-means++", n_init=restarts, tol=0.0,
                   max_iter=1000, random_state=seed, algorithm="lloyd")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        codes = model.fit_predict(X)
    return Partition.from_codes(codes)


def within_ss(X, partition: Partition) -> float:
    X = np.asarray(X, dtype=float)
    total = 0.0
    for members in partition.clusters():
        if len(members):
            pts = X[members]
            total += float(((pts - pts.mean(axis=0)) ** 2).sum())
    return total


# ---------------------------------------------------------------------- linkage


@dataclass(frozen=True)
class Dendrogram:
    """Merge history in scipy's linkage-matrix convention.

    Row ``t`` merges nodes ``merges[t]`` (leaves are 0..n-1, the node created
    at step ``t`` is ``n + t``) at height ``heights[t]``.
    """

    merges: np.ndarray
    heights: np.ndarray
    counts: np.ndarray
    method: str

    @property
    def n(self) -> int:
        return len(self.heights) + 1

    def to_scipy(self) -> np.ndarray:
        return np.column_stack([self.merges, self.heights, self.counts]).astype(float)


def linkage(d, method: str) -> Dendrogram:
    """Agglomerative clustering with Lance-Williams updates.

    ``ward`` works on squared dissimilarities and reports heights on the
    original scale (the Ward.D2 convention), so it is defined for
    non-Euclidean input too.
    """
    if method not in LINKAGE_METHODS:
        raise ValidationError(f"unknown linkage method {method!r}")
    d = np.asarray(as_dissimilarity(d))
    if d.shape[0] < 2:
        raise ValidationError("linkage needs at least two objects")
    Z = hierarchy.linkage(squareform(d, checks=False), method=method)
    return Dendrogram(Z[:, :2].astype(np.int64), Z[:, 2].copy(), Z[:, 3].astype(np.int64), method)


def cut(dendrogram: Dendrogram, k: int) -> Partition:
    n = dendrogram.n
    if not 1 <= k <= n:
        raise ValidationError(f"cannot cut {n} leaves into {k} clusters")
    codes = hierarchy.cut_tree(dendrogram.to_scipy(), n_clusters=k).ravel()
    return Partition.from_codes(codes)


def hierarchical(d, k: int, method: str) -> Partition:
    return cut(linkage(d, method), k)
