"""Clustering-quality axioms for the ASW and an exhaustive-partition oracle.

The constructions here (scaling, C-transformations, the richness
dissimilarity) and the brute-force optimizer supply ground truth for the
optimizers and the property suites run by ``silopt axioms``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .core import DissimilarityMatrix, Partition, ValidationError, as_dissimilarity, validate_dissimilarity
from .silhouette import silhouette_profile

MAX_BRUTE_FORCE_N = 12
TIE_TOL = 1e-12


def scale_dissimilarity(d, eta: float) -> DissimilarityMatrix:
    if not eta > 0:
        raise ValidationError(f"scale factor must be positive, got {eta}")
    return validate_dissimilarity(eta * np.asarray(as_dissimilarity(d)))


def _same_cluster(partition: Partition) -> np.ndarray:
    c = partition.codes
    return c[:, None] == c[None, :]


def c_transform(d, partition: Partition, within: np.ndarray, between: np.ndarray) -> DissimilarityMatrix:
    """Multiply within-cluster entries by ``within`` and the rest by ``between``.

    Factor matrices are symmetrized from their upper triangles.  A valid
    C-transformation needs ``within <= 1`` and ``between >= 1``.
    """
    D = np.asarray(as_dissimilarity(d))
    if partition.n != D.shape[0]:
        raise ValidationError("partition and dissimilarity differ in size")
    same = _same_cluster(partition)
    factors = np.where(same, within, between)
    factors = np.triu(factors, 1)
    factors = factors + factors.T
    return validate_dissimilarity(D * factors)


def random_c_transformation(d, partition: Partition, rng: np.random.Generator,
                            strength: float = 0.5) -> DissimilarityMatrix:
    """Shrink within-cluster entries by factors in ``[1-strength, 1]`` and
    stretch between-cluster entries by factors in ``[1, 1+strength]``."""
    if not 0 < strength <= 1:
        raise ValidationError("strength must lie in (0, 1]")
    n = partition.n
    within = 1.0 - strength * rng.random((n, n))
    between = 1.0 + strength * rng.random((n, n))
    return c_transform(d, partition, within, between)


def is_c_transformation(d, d_new, partition: Partition, tol: float = 0.0) -> bool:
    D, E = np.asarray(d), np.asarray(d_new)
    same = _same_cluster(partition)
    return bool(np.all(E[same] <= D[same] + tol) and np.all(E[~same] >= D[~same] - tol))


def richness_distance(partition: Partition) -> DissimilarityMatrix:
    """Dissimilarity under which ``partition`` is the unique ASW maximizer.

    Within-cluster pairs are at 1 and between-cluster pairs at 2, except that
    pairs of two singleton clusters sit at ``2 + 1/(2 n^2)``.
    """
    n, sizes = partition.n, partition.sizes
    if partition.k < 2 or partition.k == n:
        raise ValidationError("richness needs a non-trivial clustering (not one cluster, not all singletons)")
    same = _same_cluster(partition)
    D = np.where(same, 1.0, 2.0)
    single = sizes[partition.codes] == 1
    D[np.outer(single, single) & ~same] = 2.0 + 1.0 / (2.0 * n * n)
    np.fill_diagonal(D, 0.0)
    return validate_dissimilarity(D)


def enumerate_partitions(n: int, k: Optional[int] = None) -> np.ndarray:
    """All set partitions of ``n`` objects as restricted growth strings.

    Row order is lexicographic; entries are 0-based cluster codes.  With
    ``k`` set only partitions into exactly ``k`` clusters are returned.
    """
    if n < 1:
        raise ValidationError("n must be positive")
    rgs = np.zeros((1, 1), dtype=np.int8)
    top = np.zeros(1, dtype=np.int8)
    for pos in range(1, n):
        children = top.astype(np.int64) + 2
        if k is not None:
            # prune prefixes that can no longer reach, or already exceed, k blocks
            children = np.minimum(children, k)
        parent = np.repeat(np.arange(len(rgs)), children)
        starts = np.cumsum(children) - children
        value = (np.arange(parent.size) - np.repeat(starts, children)).astype(np.int8)
        rgs = np.column_stack([rgs[parent], value])
        top = np.maximum(top[parent], value)
        if k is not None:
            keep = top.astype(np.int64) + 1 + (n - pos - 1) >= k
            rgs, top = rgs[keep], top[keep]
    if k is not None:
        rgs = rgs[top == k - 1]
    return rgs


def batch_asw(d: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """ASW of many partitions at once; ``codes`` is (P, n), 0-based.

    Written independently of the silhouette module: it materializes the full
    (P, n, K) cross-sum tensor.  Partitions with one cluster get NaN.
    """
    P, n = codes.shape
    K = int(codes.max()) + 1
    onehot = (codes[:, :, None] == np.arange(K)).astype(float)  # (P, n, K)
    sizes = onehot.sum(axis=1)  # (P, K)
    T = d @ onehot
    own_size = np.take_along_axis(sizes, codes, axis=1)
    own_sum = np.take_along_axis(T, codes[:, :, None], axis=2)[:, :, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(own_size > 1, own_sum / (own_size - 1), 0.0)
        means = T / sizes[:, None, :]
    means = np.where(sizes[:, None, :] > 0, means, np.inf)
    means = np.where(onehot > 0, np.inf, means)
    b = means.min(axis=2)
    den = np.maximum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where((own_size > 1) & (den > 0) & np.isfinite(b), (b - a) / den, 0.0)
    out = s.mean(axis=1)
    out[(sizes > 0).sum(axis=1) < 2] = np.nan
    return out


@dataclass
class BruteForceResult:
    partition: Partition
    asw: float
    ties: list[Partition]
    second_best: float
    evaluated: int

    @property
    def unique(self) -> bool:
        return not self.ties


def brute_force_optimum(d, k: Optional[int] | Iterable[int] = None,
                        chunk: int = 50_000) -> BruteForceResult:
    """Exhaustive ASW maximization over all partitions with at least two clusters.

    ``k`` restricts the search to one cluster count or a collection of them.
    Ties (within ``TIE_TOL``) go to the lexicographically smallest
    restricted growth string; the others are listed in ``ties``.
    """
    D = np.asarray(as_dissimilarity(d))
    n = D.shape[0]
    if n > MAX_BRUTE_FORCE_N:
        raise ValidationError(f"brute force is limited to n <= {MAX_BRUTE_FORCE_N}, got n={n}")
    if n < 2:
        raise ValidationError("need at least two objects")
    if k is None:
        blocks = [enumerate_partitions(n)]
    else:
        ks = [k] if isinstance(k, (int, np.integer)) else sorted(set(k))
        for kk in ks:
            if not 2 <= kk <= n:
                raise ValidationError(f"k={kk} out of range 2..{n}")
        blocks = [enumerate_partitions(n, kk) for kk in ks]
    cands = np.vstack(blocks)
    if k is not None and len(blocks) > 1:
        cands = cands[np.lexsort(cands.T[::-1])]
    scores = np.concatenate([batch_asw(D, cands[i:i + chunk].astype(np.int64))
                             for i in range(0, len(cands), chunk)])
    valid = np.isfinite(scores)
    scores = np.where(valid, scores, -np.inf)
    best = float(scores.max())
    tied = np.flatnonzero(scores >= best - TIE_TOL)
    rest = scores[scores < best - TIE_TOL]
    second = float(rest.max()) if rest.size else -np.inf
    winner = Partition.from_codes(cands[tied[0]].astype(np.int64))
    ties = [Partition.from_codes(cands[t].astype(np.int64)) for t in tied[1:]]
    return BruteForceResult(winner, best, ties, second, int(valid.sum()))


# ------------------------------------------------------------------ suites


@dataclass
class SuiteReport:
    name: str
    passed: bool
    cases: int
    failures: list[str] = field(default_factory=list)
    worst: float = 0.0
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = ", ".join(f"{k}={v}" for k, v in self.detail.items())
        msg = f"{status} {self.name}: {self.cases} cases, worst deviation {self.worst:.3g}"
        return msg + (f", {extra}" if extra else "") + f" ({self.seconds:.2f}s)"


def _random_instance(rng, n_range=(3, 20), k_range=(2, 5)):
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    k = int(rng.integers(k_range[0], min(k_range[1], n - 1) + 1))
    X = rng.normal(size=(n, int(rng.integers(1, 4))))
    D = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2))
    if rng.random() < 0.3:
        # non-metric dissimilarities are allowed
        D = D ** rng.uniform(0.3, 3.0)
    codes = rng.integers(0, k, size=n)
    codes[rng.permutation(n)[:k]] = np.arange(k)
    return validate_dissimilarity(D), Partition.from_codes(codes, k)


def scale_suite(cases: int = 100, seed: int = 0, tol: float = 1e-12) -> SuiteReport:
    rng = np.random.default_rng(seed)
    t0, worst, fails = time.perf_counter(), 0.0, []
    for c in range(cases):
        D, C = _random_instance(rng)
        eta = float(np.exp(rng.uniform(-5, 5)))
        s0 = silhouette_profile(D, C).s
        s1 = silhouette_profile(scale_dissimilarity(D, eta), C).s
        dev = float(np.max(np.abs(s0 - s1)))
        worst = max(worst, dev)
        if dev > tol:
            fails.append(f"case {c}: eta={eta:.4g} deviation {dev:.3g}")
    return SuiteReport("scale-invariance", not fails, cases, fails, worst, time.perf_counter() - t0)


def consistency_suite(cases: int = 1000, seed: int = 1, tol: float = 1e-12) -> SuiteReport:
    rng = np.random.default_rng(seed)
    t0, worst, fails = time.perf_counter(), 0.0, []
    for c in range(cases):
        D, C = _random_instance(rng)
        E = random_c_transformation(D, C, rng, strength=float(rng.uniform(0.01, 1.0)))
        drop = silhouette_profile(D, C).asw - silhouette_profile(E, C).asw
        worst = max(worst, drop)
        if drop > tol or not is_c_transformation(D, E, C):
            fails.append(f"case {c}: ASW dropped by {drop:.3g}")
    return SuiteReport("consistency", not fails, cases, fails, max(worst, 0.0), time.perf_counter() - t0)


def richness_suite(ns: Iterable[int] = range(3, 8)) -> SuiteReport:
    t0, fails, cases, margin = time.perf_counter(), [], 0, np.inf
    counts = {}
    for n in ns:
        rgs = enumerate_partitions(n)
        k = rgs.max(axis=1) + 1
        targets = rgs[(k >= 2) & (k < n)]
        counts[n] = len(targets)
        for row in targets:
            C = Partition.from_codes(row.astype(np.int64))
            res = brute_force_optimum(richness_distance(C))
            cases += 1
            margin = min(margin, res.asw - res.second_best)
            if res.partition != C or not res.unique:
                fails.append(f"n={n}: target {C.labels.tolist()} not the unique maximizer")
    detail = {"targets_per_n": counts, "min_margin": float(margin)}
    return SuiteReport("richness", not fails, cases, fails, 0.0, time.perf_counter() - t0, detail)


def isomorphism_suite(cases: int = 100, seed: int = 2, tol: float = 1e-12) -> SuiteReport:
    rng = np.random.default_rng(seed)
    t0, worst, fails = time.perf_counter(), 0.0, []
    for c in range(cases):
        D, C = _random_instance(rng)
        perm = rng.permutation(C.n)
        Dp = np.asarray(D)[np.ix_(perm, perm)]
        Cp = Partition.from_codes(C.codes[perm], C.k)
        p0, p1 = silhouette_profile(D, C), silhouette_profile(Dp, Cp)
        dev = max(float(np.max(np.abs(p0.s[perm] - p1.s))), abs(p0.asw - p1.asw))
        worst = max(worst, dev)
        if dev > tol:
            fails.append(f"case {c}: deviation {dev:.3g}")
    return SuiteReport("isomorphism", not fails, cases, fails, worst, time.perf_counter() - t0)


SUITES: dict[str, Callable[[], SuiteReport]] = {
    "scale": scale_suite,
    "consistency": consistency_suite,
    "richness": richness_suite,
    "isomorphism": isomorphism_suite,
}


def run_suites(names: Optional[Iterable[str]] = None) -> list[SuiteReport]:
    names = list(SUITES) if names is None else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValidationError(f"unknown suite(s) {unknown}; choose from {list(SUITES)}")
    return [SUITES[n]() for n in names]
