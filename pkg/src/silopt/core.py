"""Shared data types: dissimilarity matrices, partitions and coordinate datasets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

SYMMETRY_TOL = 1e-9
DIAGONAL_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


@dataclass(frozen=True, eq=False)
class DissimilarityMatrix:
    """Dense symmetric matrix of nonnegative dissimilarities with zero diagonal.

    Construct through :func:`validate_dissimilarity`; the stored array is
    read-only so instances can be shared between concurrent runs.
    """

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def __len__(self):
        return self.n

    def subset(self, idx) -> "DissimilarityMatrix":
        idx = np.asarray(idx)
        sub = self.values[np.ix_(idx, idx)].copy()
        sub.setflags(write=False)
        return DissimilarityMatrix(sub)


@dataclass(frozen=True, eq=False)
class Partition:
    """A clustering of ``n`` objects into ``k`` labelled clusters.

    ``labels`` are 1-based and canonical: clusters are numbered by first
    appearance. ``k`` may exceed the number of distinct labels only when
    empty clusters are allowed (the trailing labels are then empty).
    """

    labels: np.ndarray
    k: int

    def __post_init__(self):
        self.labels.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def codes(self) -> np.ndarray:
        """0-based labels, the form used by the numerical routines."""
        return self.labels - 1

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.codes, minlength=self.k)

    @property
    def nonempty(self) -> bool:
        return bool(np.all(self.sizes >= 1))

    def clusters(self) -> list[np.ndarray]:
        """Member indices (0-based) of each cluster, in label order."""
        return [np.flatnonzero(self.codes == r) for r in range(self.k)]

    @classmethod
    def from_codes(cls, codes, k: Optional[int] = None) -> "Partition":
        """Build a canonical partition from 0-based codes.

        ``k`` defaults to the number of distinct codes; a larger ``k`` keeps
        room for empty clusters.
        """
        codes = np.asarray(codes, dtype=np.int64)
        canon, distinct = _canonical_codes(codes)
        if k is None:
            k = distinct
        elif k < distinct:
            raise ValidationError(f"k={k} is smaller than the {distinct} clusters present")
        return cls(canon + 1, int(k))

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash((self.k, self.labels.tobytes()))

    def __repr__(self):
        return f"Partition(k={self.k}, sizes={self.sizes.tolist()})"


def _canonical_codes(codes: np.ndarray) -> tuple[np.ndarray, int]:
    _, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
    # rank each distinct value by the position of its first occurrence
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return rank[inverse.ravel()], len(order)


def partition_from_labels(labels) -> Partition:
    """Canonical partition from positive integer labels (gaps are closed)."""
    arr = np.asarray(labels)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("labels must be a nonempty 1-d vector")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isfinite(arr)) or not np.all(arr == np.round(arr)):
            raise ValidationError("labels must be integers")
        arr = arr.astype(np.int64)
    if np.any(arr < 1):
        raise ValidationError("labels must be positive integers")
    return Partition.from_codes(arr)


def validate_dissimilarity(raw) -> DissimilarityMatrix:
    """Check a square matrix against the dissimilarity invariants.

    Tiny asymmetries (up to 1e-9) are averaged away and a diagonal within
    1e-12 of zero is set to exactly zero; anything worse raises
    :class:`ValidationError` naming the offending entry.
    """
    if isinstance(raw, DissimilarityMatrix):
        return raw
    d = np.array(raw, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValidationError(f"dissimilarity must be square, got shape {d.shape}")
    if d.shape[0] == 0:
        raise ValidationError("dissimilarity matrix is empty")
    bad = ~np.isfinite(d)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValidationError(f"non-finite entry at row {i + 1}, col {j + 1}")
    if (d < 0).any():
        i, j = np.argwhere(d < 0)[0]
        raise ValidationError(f"negative entry {d[i, j]!r} at row {i + 1}, col {j + 1}")
    diag = np.abs(np.diag(d))
    if (diag > DIAGONAL_TOL).any():
        i = int(np.argmax(diag))
        raise ValidationError(f"nonzero diagonal {d[i, i]!r} at row {i + 1}")
    asym = np.abs(d - d.T)
    if (asym > SYMMETRY_TOL).any():
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise ValidationError(
            f"asymmetric entries at row {i + 1}, col {j + 1}: {d[i, j]!r} vs {d[j, i]!r}"
        )
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    d.setflags(write=False)
    return DissimilarityMatrix(d)


def as_dissimilarity(d) -> DissimilarityMatrix:
    return d if isinstance(d, DissimilarityMatrix) else validate_dissimilarity(d)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Coordinate data, ``n`` rows by ``p`` columns, with optional true labels."""

    points: np.ndarray
    labels: Optional[Partition] = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValidationError(f"points must be 2-d, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("points contain non-finite coordinates")
        if self.labels is not None and self.labels.n != pts.shape[0]:
            raise ValidationError("labels and points differ in length")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def p(self) -> int:
        return self.points.shape[1]
