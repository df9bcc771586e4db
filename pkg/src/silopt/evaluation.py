"""Recovery metrics, the ASW sweep over k and the simulation harness."""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.special import comb

from . import baselines, io
from .core import Dataset, Partition, ValidationError, as_dissimilarity
from .dgp import TRUE_K, DgpSpec, generate, parse_id
from .distances import euclidean
from .optimize import FosilOptions, OsilOptions, best_k, fosil, osil, pamsil
from .silhouette import asw as asw_of

log = logging.getLogger(__name__)

METHODS = ("osil", "fosil", "pamsil", "pam", "kmeans", "single", "average", "complete", "ward")
MODES = ("fixed", "sweep")


def ari(a: Partition, b: Partition) -> float:
    """Hubert-Arabie adjusted Rand index from the contingency table.

    Two partitions that are both trivial in the same way (one cluster, or
    all singletons) have a zero denominator; they agree, so 1.0 is returned.
    """
    if a.n != b.n:
        raise ValidationError(f"partitions differ in length ({a.n} vs {b.n})")
    table = np.zeros((a.k, b.k), dtype=np.int64)
    np.add.at(table, (a.codes, b.codes), 1)
    pairs = comb(table, 2).sum()
    rows = comb(table.sum(axis=1), 2).sum()
    cols = comb(table.sum(axis=0), 2).sum()
    total = comb(a.n, 2)
    expected = rows * cols / total if total else 0.0
    top = 0.5 * (rows + cols)
    if top == expected:
        return 1.0
    return float((pairs - expected) / (top - expected))


def local_optima(asw_by_k: dict[int, float]) -> list[int]:
    """k values whose ASW beats both neighbours (one neighbour at the ends)."""
    ks = sorted(asw_by_k)
    out = []
    for pos, k in enumerate(ks):
        left = pos == 0 or asw_by_k[k] > asw_by_k[ks[pos - 1]]
        right = pos == len(ks) - 1 or asw_by_k[k] > asw_by_k[ks[pos + 1]]
        if left and right:
            out.append(k)
    return out


@dataclass
class KSweepResult:
    method: str
    ks: list[int]
    asw_by_k: dict[int, float]
    partitions_by_k: dict[int, Partition]
    kstar: int
    local_optima: list[int]
    converged_by_k: dict[int, bool] = field(default_factory=dict)
    seconds_by_k: dict[int, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def partition(self) -> Partition:
        return self.partitions_by_k[self.kstar]

    @property
    def asw(self) -> float:
        return self.asw_by_k[self.kstar]


def _inputs(data, points):
    if isinstance(data, Dataset):
        return euclidean(data), data.points
    d = as_dissimilarity(data)
    if isinstance(points, Dataset):
        points = points.points
    return d, points


def _osil_options(base: Optional[OsilOptions], kmin, kmax, seed, points) -> OsilOptions:
    opts = replace(base or OsilOptions(), kmin=kmin, kmax=kmax, seed=seed)
    if points is None and "kmeans" in opts.initializers:
        opts = replace(opts, initializers=tuple(i for i in opts.initializers if i != "kmeans"))
    return opts


def sweep(data, method: str, kmin: int, kmax: int, seed: int = 0, points=None,
          osil_opts: Optional[OsilOptions] = None,
          fosil_opts: Optional[FosilOptions] = None) -> KSweepResult:
    """Cluster at every k in ``kmin..kmax`` and score each solution by its ASW.

    ``data`` is a dissimilarity matrix or a :class:`Dataset`; coordinates are
    needed for ``kmeans`` (as method or initializer).  ``kstar`` is the ASW
    argmax with ties going to the smaller k.
    """
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}; choose from {METHODS}")
    d, points = _inputs(data, points)
    if kmin < 2 or kmax < kmin or kmax >= d.n:
        raise ValidationError(f"invalid k range {kmin}..{kmax} for n={d.n}")
    ks = list(range(kmin, kmax + 1))
    parts, conv, secs, warnings = {}, {}, {}, []

    if method in ("osil", "fosil"):
        opts = _osil_options(osil_opts, kmin, kmax, seed, points)
        if method == "osil":
            res = osil(d, opts, points)
        else:
            res = fosil(d, replace(fosil_opts or FosilOptions(), osil=opts), points)
        warnings.extend(res.warnings)
        for k, kr in res.by_k.items():
            parts[k], conv[k], secs[k] = kr.partition, kr.converged, kr.seconds
    elif method in baselines.LINKAGE_METHODS:
        t0 = time.perf_counter()
        tree = baselines.linkage(d, method)
        build = time.perf_counter() - t0
        for k in ks:
            t0 = time.perf_counter()
            parts[k], conv[k] = baselines.cut(tree, k), True
            secs[k] = build + time.perf_counter() - t0
    else:
        for k in ks:
            t0 = time.perf_counter()
            if method == "pamsil":
                r = pamsil(d, k)
                parts[k], conv[k] = r.partition, True
            elif method == "pam":
                r = baselines.pam(d, k)
                parts[k], conv[k] = r.partition, True
            else:
                if points is None:
                    raise ValidationError("k-means needs coordinate data, not a dissimilarity matrix")
                parts[k], conv[k] = baselines.kmeans(points, k, seed=seed), True
            secs[k] = time.perf_counter() - t0

    scores = {}
    for k in ks:
        if parts[k].sizes.astype(bool).sum() < 2:
            warnings.append(f"k={k}: {method} returned fewer than two clusters")
            scores[k] = 0.0
        else:
            scores[k] = asw_of(d, parts[k])
    kstar = best_k(scores)
    return KSweepResult(method, ks, scores, parts, kstar, local_optima(scores), conv, secs, warnings)


def fit(data, method: str, k: int, seed: int = 0, points=None,
        osil_opts: Optional[OsilOptions] = None,
        fosil_opts: Optional[FosilOptions] = None) -> KSweepResult:
    """A sweep over the single value ``k``."""
    return sweep(data, method, k, k, seed=seed, points=points,
                 osil_opts=osil_opts, fosil_opts=fosil_opts)


# ------------------------------------------------------------------ simulation


@dataclass(frozen=True)
class SimSummary:
    dgp: object
    method: str
    mode: str
    mean_asw: float
    se_asw: float
    mean_ari: float
    se_ari: float
    ppr: Optional[float]
    reps: int
    failures: int = 0

    def as_row(self) -> dict:
        return {"dgp": self.dgp, "method": self.method, "mode": self.mode,
                "mean_asw": self.mean_asw, "se_asw": self.se_asw, "mean_ari": self.mean_ari,
                "se_ari": self.se_ari, "ppr": self.ppr, "reps": self.reps}


@dataclass
class SimulationOutcome:
    rows: list[dict]
    summary: list[SimSummary]
    warnings: list[str] = field(default_factory=list)

    def lookup(self, dgp, method: str, mode: str = "fixed") -> SimSummary:
        for s in self.summary:
            if s.dgp == dgp and s.method == method and s.mode == mode:
                return s
        raise KeyError((dgp, method, mode))


def worker_count() -> int:
    """Worker processes: ``SILOPT_THREADS`` if set, else the available cores."""
    raw = os.environ.get("SILOPT_THREADS")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValidationError(f"SILOPT_THREADS must be an integer, got {raw!r}") from None
        if value < 1:
            raise ValidationError("SILOPT_THREADS must be at least 1")
        return value
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def _mean_se(values):
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return math.nan, math.nan
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def _one_replication(task) -> list[dict]:
    dgp, rep, seed, methods, modes, kmin, kmax, paper_compat, osil_opts = task
    rows = []
    try:
        data = generate(DgpSpec(dgp, seed=seed, paper_compat=paper_compat))
        d = euclidean(data)
    except Exception as exc:  # a failed draw voids every method of this rep
        return [{"dgp": dgp, "method": m, "mode": mode, "rep": rep, "error": str(exc)}
                for m in methods for mode in modes]
    true_k = TRUE_K[dgp]
    for method in methods:
        for mode in modes:
            lo, hi = (true_k, true_k) if mode == "fixed" else (kmin, kmax)
            row = {"dgp": dgp, "method": method, "mode": mode, "rep": rep}
            t0 = time.perf_counter()
            try:
                res = sweep(d, method, lo, min(hi, d.n - 1), seed=seed, points=data.points,
                            osil_opts=osil_opts)
            except Exception as exc:
                row["error"] = f"{type(exc).__name__}: {exc}"
                rows.append(row)
                continue
            row.update(k=res.kstar, asw=res.asw, ari=ari(res.partition, data.labels),
                       seconds=time.perf_counter() - t0,
                       converged=all(res.converged_by_k.values()),
                       hit=res.kstar == true_k)
            rows.append(row)
    return rows


def run_simulation(dgps: Sequence, methods: Sequence[str], reps: int,
                   modes: Sequence[str] = ("fixed",), kmin: int = 2, kmax: int = 8,
                   seed: int = 0, paper_compat: bool = False, out: Optional[Path] = None,
                   workers: Optional[int] = None,
                   osil_opts: Optional[OsilOptions] = None) -> SimulationOutcome:
    """Generate ``reps`` data sets per DGP and cluster each with every method.

    Replication ``r`` uses seed ``seed + r``.  ``fixed`` mode clusters at the
    true k; ``sweep`` mode estimates k over ``kmin..kmax`` by the ASW and
    feeds the PPR column.  Failed replications are kept as rows with an
    ``error`` entry and left out of the means.  With ``out`` set, per-run and
    summary CSVs are written there.
    """
    if reps < 1:
        raise ValidationError("reps must be at least 1")
    dgps = [parse_id(g) for g in dgps]
    for m in methods:
        if m not in METHODS:
            raise ValidationError(f"unknown method {m!r}; choose from {METHODS}")
    for mode in modes:
        if mode not in MODES:
            raise ValidationError(f"unknown mode {mode!r}")
    if "sweep" in modes and not 2 <= kmin <= kmax:
        raise ValidationError(f"invalid sweep range {kmin}..{kmax}")
    for g in dgps:
        # surface parameter problems (e.g. DGP5 without paper_compat) before the loop
        generate(DgpSpec(g, seed=seed, paper_compat=paper_compat))

    tasks = [(g, r, seed + r, tuple(methods), tuple(modes), kmin, kmax, paper_compat, osil_opts)
             for g in dgps for r in range(reps)]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            chunks = list(pool.map(_one_replication, tasks))
    else:
        chunks = [_one_replication(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]

    warnings, summary = [], []
    if reps == 1:
        warnings.append("reps=1: standard errors are reported as 0 (degenerate sample)")
    for g in dgps:
        for method in methods:
            for mode in modes:
                mine = [r for r in rows if r["dgp"] == g and r["method"] == method and r["mode"] == mode]
                ok = [r for r in mine if "error" not in r]
                failed = len(mine) - len(ok)
                if failed:
                    warnings.append(f"dgp {g} {method} {mode}: {failed} failed replication(s)")
                m_asw, se_asw = _mean_se([r["asw"] for r in ok])
                m_ari, se_ari = _mean_se([r["ari"] for r in ok])
                ppr = 100.0 * np.mean([r["hit"] for r in ok]) if (mode == "sweep" and ok) else None
                summary.append(SimSummary(g, method, mode, m_asw, se_asw, m_ari, se_ari,
                                          ppr, len(ok), failed))
    for w in warnings:
        log.warning(w)

    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        for g in dgps:
            for mode in modes:
                io.write_results(out / f"runs_dgp{g}_{mode}.csv",
                                 [r for r in rows if r["dgp"] == g and r["mode"] == mode])
        io.write_summary(out / "summary.csv", [s.as_row() for s in summary])
    return SimulationOutcome(rows, summary, warnings)
