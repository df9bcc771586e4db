"""Silhouette widths, the average silhouette width (ASW) and its incremental form.

The incremental machinery keeps, for every object ``i`` and cluster ``r``, the
cross-sum ``T[i, r] = sum_{l(j) = r} d(i, j)``.  Relabeling one object changes
only two columns of ``T``, so the ASW of every single-object move can be
scored in O(n) each instead of recomputing the full profile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DissimilarityMatrix, Partition, ValidationError, as_dissimilarity

REBUILD_EVERY = 64


@dataclass(frozen=True)
class SilhouetteProfile:
    """Per-object ``a``, ``b``, ``s`` and their mean ``asw``.

    ``neighbor`` holds the 0-based index of the cluster attaining ``b``
    (lowest index on ties).
    """

    a: np.ndarray
    b: np.ndarray
    s: np.ndarray
    neighbor: np.ndarray
    asw: float


def _widths(a, b):
    den = np.maximum(a, b)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = (b - a) / den
    return np.where(den > 0, s, 0.0)


def _onehot(codes, k):
    out = np.zeros((len(codes), k))
    out[np.arange(len(codes)), codes] = 1.0
    return out


def _profile_from_sums(T, codes, sizes):
    n = len(codes)
    rows = np.arange(n)
    own = sizes[codes]
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.where(own > 1, T[rows, codes] / (own - 1), 0.0)
        means = T / sizes
    means[:, sizes == 0] = np.inf
    means[rows, codes] = np.inf
    neighbor = np.argmin(means, axis=1)
    b = means[rows, neighbor]
    s = np.where(own > 1, _widths(a, b), 0.0)
    return a, b, s, neighbor, means


def _check_partition(d: np.ndarray, codes: np.ndarray, k: int):
    if len(codes) != d.shape[0]:
        raise ValidationError(
            f"partition covers {len(codes)} objects but dissimilarity has {d.shape[0]}"
        )
    if np.count_nonzero(np.bincount(codes, minlength=k)) < 2:
        raise ValidationError("the ASW needs at least two nonempty clusters")


def silhouette_profile(d, partition: Partition) -> SilhouetteProfile:
    """Exact silhouette widths of every object.

    Objects in one-point clusters get ``s = 0``; their ``a`` is reported as 0
    and ``b`` is still the nearest-cluster mean dissimilarity.
    """
    d = np.asarray(as_dissimilarity(d))
    codes = partition.codes
    _check_partition(d, codes, partition.k)
    sizes = np.bincount(codes, minlength=partition.k)
    T = d @ _onehot(codes, partition.k)
    a, b, s, neighbor, _ = _profile_from_sums(T, codes, sizes)
    return SilhouetteProfile(a=a, b=b, s=s, neighbor=neighbor, asw=float(s.mean()))


def asw(d, partition: Partition) -> float:
    return silhouette_profile(d, partition).asw


class MoveState:
    """Cross-sum cache for scoring and applying single-object relabelings.

    Object and cluster indices are 0-based.  A state is owned by one
    optimization run; :meth:`apply_move` mutates it in place.
    """

    def __init__(self, d, codes, k: int, enforce_nonempty: bool = True):
        self.d = np.asarray(as_dissimilarity(d))
        self.codes = np.array(codes, dtype=np.int64)
        self.k = int(k)
        if self.codes.min() < 0 or self.codes.max() >= self.k:
            raise ValidationError("cluster codes must lie in 0..k-1")
        _check_partition(self.d, self.codes, self.k)
        self.enforce_nonempty = enforce_nonempty
        self.sizes = np.bincount(self.codes, minlength=self.k)
        if enforce_nonempty and np.any(self.sizes == 0):
            raise ValidationError("initial partition has an empty cluster")
        self.moves = 0
        self.rebuild()

    @property
    def n(self) -> int:
        return len(self.codes)

    @property
    def partition(self) -> Partition:
        return Partition.from_codes(self.codes, self.k)

    def rebuild(self):
        """Recompute the cross-sums from scratch (bounds floating-point drift)."""
        self.crosssum = self.d @ _onehot(self.codes, self.k)
        self._refresh()

    def _refresh(self):
        a, b, s, _, means = _profile_from_sums(self.crosssum, self.codes, self.sizes)
        self._a, self._b, self._s, self._means = a, b, s, means
        self.asw = float(s.mean())

    def copy(self) -> "MoveState":
        new = object.__new__(MoveState)
        new.__dict__.update(self.__dict__)
        for name in ("codes", "sizes", "crosssum", "_a", "_b", "_s", "_means"):
            setattr(new, name, getattr(self, name).copy())
        return new

    def _check_move(self, i, r):
        if not 0 <= r < self.k:
            raise ValidationError(f"cluster {r} out of range 0..{self.k - 1}")
        p = self.codes[i]
        if r == p:
            raise ValidationError(f"object {i} is already in cluster {r}")
        if self.sizes[p] == 1:
            if self.enforce_nonempty:
                raise ValidationError(f"moving object {i} would empty cluster {p}")
            if np.count_nonzero(self.sizes) - 1 + (self.sizes[r] == 0) < 2:
                raise ValidationError("move would leave fewer than two clusters")
        return p

    def evaluate_move(self, i: int, r: int) -> float:
        """ASW after relabeling object ``i`` to cluster ``r``; the state is unchanged."""
        p = self._check_move(i, r)
        return float(self._scores(p, r, np.array([i]))[0])

    def candidate_matrix(self) -> np.ndarray:
        """ASW of every admissible single-object move as an ``(n, k)`` array.

        Inadmissible entries (current cluster, emptying moves under the
        nonempty constraint, moves leaving fewer than two clusters) are -inf.
        """
        out = np.full((self.n, self.k), -np.inf)
        for p in range(self.k):
            members = np.flatnonzero(self.codes == p)
            if len(members) == 0 or (self.enforce_nonempty and len(members) == 1):
                continue
            for q in range(self.k):
                if q != p:
                    out[members, q] = self._scores(p, q, members)
        return out

    def _scores(self, p, q, cand):
        """ASW after moving each object of ``cand`` (all in cluster p) to q."""
        d, T, m, c = self.d, self.crosssum, self.sizes, self.codes
        mp, mq = m[p], m[q]
        alive = np.count_nonzero(m) - (mp == 1) + (mq == 0)
        if alive < 2:
            return np.full(len(cand), -np.inf)
        keep = np.ones(self.k, dtype=bool)
        keep[[p, q]] = False
        rest = self._means[:, keep].min(axis=1) if keep.any() else np.full(self.n, np.inf)
        dc = d[:, cand]
        total = np.zeros(len(cand))

        def new_p_mean(rows):
            if mp == 1:
                return np.full((len(rows), len(cand)), np.inf)
            return (T[rows, p, None] - dc[rows]) / (mp - 1)

        def new_q_mean(rows):
            return (T[rows, q, None] + dc[rows]) / (mq + 1)

        # objects staying behind in p
        rows = np.flatnonzero(c == p)
        if mp > 2:
            a = (T[rows, p, None] - dc[rows]) / (mp - 2)
            b = np.minimum(rest[rows, None], new_q_mean(rows))
            s = _widths(a, b)
            s[rows[:, None] == cand[None, :]] = 0.0
            total += s.sum(axis=0)
        # objects already in q
        rows = np.flatnonzero(c == q)
        if len(rows):
            a = (T[rows, q, None] + dc[rows]) / mq
            b = np.minimum(rest[rows, None], new_p_mean(rows))
            total += _widths(a, b).sum(axis=0)
        # everyone else keeps a(j); b(j) may drop to the new p or q mean
        other = (c != p) & (c != q) & (m[c] > 1)
        rows = np.flatnonzero(other)
        if len(rows):
            b = np.minimum(np.minimum(rest[rows, None], new_p_mean(rows)), new_q_mean(rows))
            total += _widths(self._a[rows, None], b).sum(axis=0)
        # the moved object itself
        if mq > 0:
            a = T[cand, q] / mq
            bp = T[cand, p] / (mp - 1) if mp > 1 else np.inf
            total += _widths(a, np.minimum(rest[cand], bp))
        return total / self.n

    def apply_move(self, i: int, r: int) -> "MoveState":
        p = self._check_move(i, r)
        col = self.d[:, i]
        self.crosssum[:, p] -= col
        self.crosssum[:, r] += col
        self.sizes[p] -= 1
        self.sizes[r] += 1
        self.codes[i] = r
        self.moves += 1
        if self.moves % REBUILD_EVERY == 0:
            self.rebuild()
        else:
            self._refresh()
        return self

    def insertion_scores(self, cross: np.ndarray) -> np.ndarray:
        """ASW of the current objects plus one extra object, for every placement.

        ``cross`` has shape ``(n, h)``: dissimilarities from the current
        objects to ``h`` new objects.  Entry ``[x, r]`` of the result is the
        ASW of the ``n + 1`` objects when new object ``x`` joins cluster
        ``r`` and nothing else changes.  Placements into empty clusters are
        scored with the newcomer as a one-point cluster.
        """
        cross = np.asarray(cross, dtype=float)
        T, m, c = self.crosssum, self.sizes, self.codes
        h = cross.shape[1]
        out = np.empty((h, self.k))
        own_multi = m[c] > 1
        # newcomer's mean dissimilarity to each cluster
        with np.errstate(invalid="ignore", divide="ignore"):
            to_cluster = (_onehot(c, self.k).T @ cross).T / m
        to_cluster[:, m == 0] = np.inf
        for r in range(self.k):
            keep = np.ones(self.k, dtype=bool)
            keep[r] = False
            rest = self._means[:, keep].min(axis=1) if keep.any() else np.full(self.n, np.inf)
            total = np.zeros(h)
            in_r = c == r
            rows = np.flatnonzero(in_r)
            if len(rows):
                a = (T[rows, r, None] + cross[rows]) / m[r]
                total += _widths(a, self._b[rows, None]).sum(axis=0)
            rows = np.flatnonzero(~in_r & own_multi)
            if len(rows):
                b = np.minimum(rest[rows, None], (T[rows, r, None] + cross[rows]) / (m[r] + 1))
                total += _widths(self._a[rows, None], b).sum(axis=0)
            if m[r] > 0:
                others = np.delete(to_cluster, r, axis=1)
                total += _widths(to_cluster[:, r], others.min(axis=1))
            out[:, r] = total / (self.n + 1)
        return out


def build_move_state(d, partition: Partition, enforce_nonempty: bool = True) -> MoveState:
    return MoveState(d, partition.codes, partition.k, enforce_nonempty=enforce_nonempty)
