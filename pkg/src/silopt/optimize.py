"""Direct ASW optimization: OSil, FOSil and the medoid-restricted PAMSil.

OSil is a steepest-ascent exchange search: at every step it scores all
single-object relabelings and applies the best one while it strictly improves
the ASW.  FOSil runs OSil on the best of several random subsamples and then
places each held-out object where it maximizes the ASW of the subsample plus
that object.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import baselines
from .core import Dataset, DissimilarityMatrix, Partition, ValidationError, as_dissimilarity
from .silhouette import MoveState, _onehot, _profile_from_sums, silhouette_profile

log = logging.getLogger(__name__)

INITIALIZERS = ("kmeans", "pam", "average", "single", "complete", "ward", "random")
DEFAULT_INITIALIZERS = ("kmeans", "pam", "average", "single", "ward", "random")
# smallest ASW gain that counts as a strict improvement
IMPROVEMENT_TOL = 1e-12


@dataclass
class OsilOptions:
    kmin: int = 2
    kmax: int = 2
    initializers: tuple[str, ...] = DEFAULT_INITIALIZERS
    max_sweeps: Optional[int] = None  # None -> 10 * n
    enforce_nonempty: bool = True
    seed: int = 0
    kmeans_restarts: int = 100

    def validate(self, n: int) -> None:
        if self.kmin < 2:
            raise ValidationError("kmin must be at least 2 (the ASW is undefined for k=1)")
        if self.kmax < self.kmin:
            raise ValidationError(f"kmax={self.kmax} is below kmin={self.kmin}")
        if self.kmax >= n:
            raise ValidationError(f"kmax={self.kmax} must be smaller than n={n}")
        if self.max_sweeps is not None and self.max_sweeps < 1:
            raise ValidationError("max_sweeps must be at least 1")
        if not self.initializers:
            raise ValidationError("at least one initializer is required")
        unknown = set(self.initializers) - set(INITIALIZERS)
        if unknown:
            raise ValidationError(f"unknown initializers: {sorted(unknown)}")

    @property
    def ks(self) -> range:
        return range(self.kmin, self.kmax + 1)


@dataclass
class FosilOptions:
    sample_size: Optional[int] = None  # None -> round(0.2 * n)
    num_samples: int = 25
    osil: OsilOptions = field(default_factory=OsilOptions)

    def resolved_sample_size(self, n: int) -> int:
        return int(round(0.2 * n)) if self.sample_size is None else int(self.sample_size)

    def validate(self, n: int) -> None:
        if self.num_samples < 1:
            raise ValidationError("num_samples must be at least 1")
        ns = self.resolved_sample_size(n)
        if ns > n:
            raise ValidationError(f"sample size {ns} exceeds n={n}")
        if ns <= self.osil.kmax:
            raise ValidationError(f"sample size {ns} must exceed kmax={self.osil.kmax}")
        self.osil.validate(ns)


@dataclass
class ExchangeResult:
    """Outcome of one OSil run at fixed k from one initialization."""

    partition: Partition
    asw: float
    init_asw: float
    trace: list[float]
    moves: int
    converged: bool

    @property
    def sweeps(self) -> int:
        return self.moves + (1 if self.converged else 0)


@dataclass
class KResult:
    k: int
    partition: Partition
    asw: float
    initializer: str
    per_initializer: dict[str, float]
    init_asw: dict[str, float]
    trace: list[float]
    converged: bool
    seconds: float = 0.0


@dataclass
class OptimizeResult:
    method: str
    by_k: dict[int, KResult]
    kstar: int
    warnings: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def partition(self) -> Partition:
        return self.by_k[self.kstar].partition

    @property
    def asw(self) -> float:
        return self.by_k[self.kstar].asw

    @property
    def asw_by_k(self) -> dict[int, float]:
        return {k: r.asw for k, r in self.by_k.items()}

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.by_k.values())


def best_k(asw_by_k: dict[int, float]) -> int:
    """Argmax over k; ties go to the smallest k."""
    ks = sorted(asw_by_k)
    return max(ks, key=lambda k: (asw_by_k[k], -k))


def _split_input(d, points):
    if isinstance(d, Dataset):
        from .distances import euclidean

        points = d.points if points is None else points
        d = euclidean(d)
    if isinstance(points, Dataset):
        points = points.points
    return as_dissimilarity(d), points


def random_partition(n: int, k: int, rng: np.random.Generator) -> Partition:
    """Uniform random labels conditioned on all k clusters being nonempty."""
    codes = rng.integers(0, k, size=n)
    anchors = rng.permutation(n)[:k]
    codes[anchors] = np.arange(k)
    return Partition.from_codes(codes, k)


def initial_partition(name: str, d: DissimilarityMatrix, k: int, points=None,
                      seed: int = 0, kmeans_restarts: int = 100) -> Partition:
    """Starting clustering with exactly ``k`` nonempty clusters."""
    if name == "kmeans":
        if points is None:
            raise ValidationError("k-means initialization needs coordinate data")
        part = baselines.kmeans(points, k, restarts=kmeans_restarts, seed=seed)
    elif name == "pam":
        part = baselines.pam(d, k).partition
    elif name in baselines.LINKAGE_METHODS:
        part = baselines.hierarchical(d, k, name)
    elif name == "random":
        part = random_partition(d.n, k, np.random.default_rng([seed, k]))
    else:
        raise ValidationError(f"unknown initializer {name!r}")
    if part.k != k or not part.nonempty:
        raise ValidationError(f"{name} produced {part.k} nonempty clusters instead of {k}")
    return part


def osil_fixed_k(d, k: int, init: Partition, max_sweeps: Optional[int] = None,
                 enforce_nonempty: bool = True) -> ExchangeResult:
    """Steepest-ascent single-object exchange from ``init`` at fixed ``k``.

    Each iteration scores every admissible (object, cluster) relabeling and
    applies the best one if it raises the ASW by more than
    ``IMPROVEMENT_TOL``; ties go to the smallest (object, cluster) pair.
    Stops at a local optimum or after ``max_sweeps`` accepted moves
    (``converged`` is then False).
    """
    d = as_dissimilarity(d)
    if k < 2 or k >= d.n:
        raise ValidationError(f"k={k} out of range 2..{d.n - 1}")
    if init.n != d.n:
        raise ValidationError("initial partition does not match the dissimilarity size")
    if init.k != k or not init.nonempty:
        raise ValidationError(f"initial partition must have exactly {k} nonempty clusters")
    if max_sweeps is None:
        max_sweeps = 10 * d.n
    state = MoveState(d, init.codes, k, enforce_nonempty=enforce_nonempty)
    trace = [state.asw]
    converged = False
    while state.moves < max_sweeps:
        scores = state.candidate_matrix()
        flat = int(np.argmax(scores))
        if not scores.flat[flat] > state.asw + IMPROVEMENT_TOL:
            converged = True
            break
        i, r = divmod(flat, k)
        state.apply_move(i, r)
        trace.append(state.asw)
    else:
        # the cap was reached; check whether we happen to sit at an optimum
        converged = not state.candidate_matrix().max() > state.asw + IMPROVEMENT_TOL
    state.rebuild()
    return ExchangeResult(state.partition, state.asw, trace[0], trace, state.moves, converged)


def _best_of_inits(d, k, points, opts: OsilOptions, seed: int, warnings: list[str]):
    per_init, init_asw, runs = {}, {}, {}
    for name in opts.initializers:
        try:
            init = initial_partition(name, d, k, points, seed=seed,
                                     kmeans_restarts=opts.kmeans_restarts)
        except ValidationError as exc:
            warnings.append(f"k={k}: initializer {name} skipped: {exc}")
            continue
        run = osil_fixed_k(d, k, init, opts.max_sweeps, opts.enforce_nonempty)
        per_init[name], init_asw[name], runs[name] = run.asw, run.init_asw, run
    if not runs:
        raise ValidationError(f"no initializer succeeded for k={k}")
    # first listed initializer wins ties
    winner = max(runs, key=lambda name: (runs[name].asw, -list(runs).index(name)))
    return winner, runs[winner], per_init, init_asw


def osil(d, opts: Optional[OsilOptions] = None, points=None) -> OptimizeResult:
    """Run OSil for every k in ``opts.ks`` from every configured initializer.

    ``d`` may be a dissimilarity matrix or a :class:`Dataset` (Euclidean
    distances are then used and k-means initialization is available).
    Failing initializers are skipped and reported in ``warnings``.
    """
    opts = opts or OsilOptions()
    d, points = _split_input(d, points)
    opts.validate(d.n)
    warnings: list[str] = []
    by_k = {}
    for k in opts.ks:
        t0 = time.perf_counter()
        winner, run, per_init, init_asw = _best_of_inits(d, k, points, opts, opts.seed, warnings)
        by_k[k] = KResult(k, run.partition, run.asw, winner, per_init, init_asw, run.trace,
                          run.converged, time.perf_counter() - t0)
        log.debug("osil k=%d asw=%.6f via %s", k, run.asw, winner)
    kstar = best_k({k: r.asw for k, r in by_k.items()})
    meta = {"initializers": list(opts.initializers),
            "note": "random initialization stands in for model-based clustering"}
    return OptimizeResult("osil", by_k, kstar, warnings, meta)


def _subsample(rng, n, ns):
    if ns == n:
        return np.arange(n)
    return np.sort(rng.choice(n, size=ns, replace=False))


def fosil(d, fopts: Optional[FosilOptions] = None, points=None) -> OptimizeResult:
    """Fast OSil: cluster the best of M subsamples, then place the rest.

    Each held-out object is assigned independently to the cluster that
    maximizes the ASW of the chosen subsample plus that object alone.
    """
    fopts = fopts or FosilOptions()
    d, points = _split_input(d, points)
    fopts.validate(d.n)
    opts = fopts.osil
    n, ns = d.n, fopts.resolved_sample_size(d.n)
    warnings: list[str] = []
    by_k = {}
    for k in opts.ks:
        t0 = time.perf_counter()
        rng = np.random.default_rng([opts.seed, k, 7])
        best = None
        for m in range(fopts.num_samples):
            idx = _subsample(rng, n, ns)
            sub_points = None if points is None else points[idx]
            winner, run, per_init, init_asw = _best_of_inits(
                d.subset(idx), k, sub_points, opts, opts.seed + m, warnings)
            if best is None or run.asw > best[2].asw:
                best = (idx, winner, run, per_init, init_asw)
        idx, winner, run, per_init, init_asw = best
        codes = np.empty(n, dtype=np.int64)
        codes[idx] = run.partition.codes
        held = np.setdiff1d(np.arange(n), idx)
        if len(held):
            state = MoveState(d.subset(idx), run.partition.codes, k, opts.enforce_nonempty)
            scores = state.insertion_scores(np.asarray(d)[np.ix_(idx, held)])
            codes[held] = np.argmax(scores, axis=1)
        part = Partition.from_codes(codes, k)
        full = silhouette_profile(d, part).asw
        by_k[k] = KResult(k, part, full, winner, per_init, init_asw, run.trace,
                          run.converged, time.perf_counter() - t0)
    kstar = best_k({k: r.asw for k, r in by_k.items()})
    meta = {"sample_size": ns, "num_samples": fopts.num_samples,
            "initializers": list(opts.initializers)}
    return OptimizeResult("fosil", by_k, kstar, warnings, meta)


@dataclass(frozen=True)
class PamsilResult:
    partition: Partition
    asw: float
    medoids: np.ndarray
    swaps: int


def pamsil(d, k: int, max_swaps: int = 10_000) -> PamsilResult:
    """Medoid-restricted ASW search.

    Clusterings are induced by nearest-medoid assignment.  Starting from the
    PAM BUILD medoids, the best medoid/non-medoid swap is applied while it
    strictly raises the ASW of the induced partition.
    """
    d = np.asarray(as_dissimilarity(d))
    n = d.shape[0]
    if not 2 <= k < n:
        raise ValidationError(f"k={k} out of range 2..{n - 1}")
    medoids = baselines.pam_build(d, k)
    codes = baselines.nearest_medoid_codes(d, medoids)
    onehot = _onehot(codes, k)
    T = d @ onehot
    current = float(_profile_from_sums(T, codes, onehot.sum(axis=0))[2].mean())
    swaps = 0
    while swaps < max_swaps:
        best = (current + IMPROVEMENT_TOL, None)
        is_medoid = np.zeros(n, dtype=bool)
        is_medoid[medoids] = True
        for m in range(k):
            for h in np.flatnonzero(~is_medoid):
                trial = medoids.copy()
                trial[m] = h
                new_codes = baselines.nearest_medoid_codes(d, trial)
                changed = np.flatnonzero(new_codes != codes)
                new_onehot = _onehot(new_codes, k)
                T_new = T + d[:, changed] @ (new_onehot[changed] - onehot[changed])
                score = _profile_from_sums(T_new, new_codes, new_onehot.sum(axis=0))[2].mean()
                if score > best[0]:
                    best = (score, (m, h))
        if best[1] is None:
            break
        m, h = best[1]
        medoids = medoids.copy()
        medoids[m] = h
        codes = baselines.nearest_medoid_codes(d, medoids)
        onehot = _onehot(codes, k)
        T = d @ onehot
        current = float(_profile_from_sums(T, codes, onehot.sum(axis=0))[2].mean())
        swaps += 1
    part = Partition.from_codes(codes, k)
    return PamsilResult(part, silhouette_profile(d, part).asw, medoids, swaps)
