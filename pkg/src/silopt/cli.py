"""``silopt`` command line: cluster, simulate, eval, axioms, bench, generate.

Exit codes: 0 success, 1 runtime failure (or a failing axiom suite),
2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, io
from .axioms import SUITES, run_suites
from .core import Dataset, Partition, ValidationError
from .dgp import DgpSpec, generate, parse_id
from .distances import METRICS, compute
from .evaluation import METHODS, ari, run_simulation, sweep
from .optimize import INITIALIZERS, FosilOptions, OsilOptions

log = logging.getLogger("silopt")


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="silopt", description="Clustering by direct ASW optimization.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster one data set")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="coordinate CSV (header, optional id/label columns)")
    src.add_argument("--dist", type=Path, help="square dissimilarity CSV with id column and header")
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--k", type=int)
    p.add_argument("--kmin", type=int)
    p.add_argument("--kmax", type=int)
    p.add_argument("--metric", choices=METRICS, default="euclidean")
    p.add_argument("--inits", type=_csv_list, help=f"initializers, subset of {','.join(INITIALIZERS)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ns", type=int, help="FOSil sample size (default 0.2 n)")
    p.add_argument("--m", type=int, default=25, help="FOSil number of samples")
    p.add_argument("--out", type=Path, required=True, help="partition CSV; the report goes next to it as .json")

    p = sub.add_parser("simulate", help="run the simulation study")
    p.add_argument("--dgp", type=_csv_list, required=True)
    p.add_argument("--methods", type=_csv_list, required=True)
    p.add_argument("--reps", type=int, required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--fixed-k", action="store_true", help="cluster at the true k")
    mode.add_argument("--sweep", nargs=2, type=int, metavar=("KMIN", "KMAX"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--paper-compat", action="store_true",
                   help="substitute documented values for ambiguous generator parameters")

    p = sub.add_parser("eval", help="ARI between two label files")
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True)

    p = sub.add_parser("axioms", help="run the axiom property suites")
    p.add_argument("--suite", choices=list(SUITES), action="append")

    p = sub.add_parser("bench", help="OSil vs FOSil timing on four Gaussian corners")
    p.add_argument("--fig1", action="store_true", help="the four-corner setup (the only one available)")
    p.add_argument("--nmin", type=int, default=100)
    p.add_argument("--nmax", type=int, default=1000)
    p.add_argument("--step", type=int, default=100)
    p.add_argument("--sizes", type=_int_list, help="explicit comma-separated n values")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("bench.csv"))

    p = sub.add_parser("generate", help="write one simulated data set as CSV")
    p.add_argument("--dgp", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, help="size (fig1 only)")
    p.add_argument("--paper-compat", action="store_true")
    p.add_argument("--append", action="append", type=lambda s: [float(x) for x in _csv_list(s)],
                   metavar="X1,X2,...", help="extra row labelled as its own cluster (repeatable)")
    p.add_argument("--out", type=Path, required=True)
    return parser


# ------------------------------------------------------------------ commands


def _cmd_cluster(args) -> int:
    if (args.k is None) == (args.kmin is None and args.kmax is None):
        raise ValidationError("give either --k or both --kmin and --kmax")
    if args.k is not None:
        kmin = kmax = args.k
    elif args.kmin is None or args.kmax is None:
        raise ValidationError("--kmin and --kmax must be given together")
    else:
        kmin, kmax = args.kmin, args.kmax

    points, ids = None, None
    if args.input is not None:
        data = io.read_dataset(args.input)
        points = data.points
        d = compute(data, args.metric)
        source = str(args.input)
    else:
        d = io.read_dissimilarity(args.dist)
        ids = io.read_ids(args.dist)
        source = str(args.dist)
        if args.method == "kmeans":
            raise ValidationError("k-means needs coordinate data (--input), not a dissimilarity matrix")

    osil_opts = OsilOptions(kmin=kmin, kmax=kmax, seed=args.seed)
    if args.inits:
        osil_opts.initializers = tuple(args.inits)
        osil_opts.validate(d.n)
    fosil_opts = FosilOptions(sample_size=args.ns, num_samples=args.m)

    t0 = time.perf_counter()
    res = sweep(d, args.method, kmin, kmax, seed=args.seed, points=points,
                osil_opts=osil_opts, fosil_opts=fosil_opts)
    seconds = time.perf_counter() - t0
    for w in res.warnings:
        log.warning(w)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    io.write_partition(args.out, res.partition, ids)
    report = {
        "method": args.method,
        "source": source,
        "options": {
            "metric": args.metric if args.input is not None else "precomputed",
            "kmin": kmin, "kmax": kmax, "seed": args.seed,
            "initializers": list(_effective_inits(osil_opts, points)),
            "max_sweeps": osil_opts.max_sweeps, "enforce_nonempty": osil_opts.enforce_nonempty,
            "kmeans_restarts": osil_opts.kmeans_restarts,
            "sample_size": fosil_opts.resolved_sample_size(d.n) if args.method == "fosil" else None,
            "num_samples": fosil_opts.num_samples if args.method == "fosil" else None,
        },
        "n": d.n,
        "asw_by_k": {str(k): v for k, v in res.asw_by_k.items()},
        "kstar": res.kstar,
        "asw": res.asw,
        "local_optima": res.local_optima,
        "converged_by_k": {str(k): v for k, v in res.converged_by_k.items()},
        "seconds": seconds,
        "warnings": res.warnings,
    }
    report_path = args.out.with_suffix(".json")
    report_path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    print(f"k*={res.kstar} asw={res.asw:.6f} local optima={res.local_optima} -> {args.out}")
    return 0


def _effective_inits(opts: OsilOptions, points):
    return [i for i in opts.initializers if points is not None or i != "kmeans"]


def _cmd_simulate(args) -> int:
    if args.reps < 1:
        raise ValidationError("--reps must be at least 1")
    dgps = [parse_id(g) for g in args.dgp]
    if args.fixed_k:
        modes, kmin, kmax = ("fixed",), 2, 8
    else:
        modes, (kmin, kmax) = ("sweep",), args.sweep
    out = run_simulation(dgps, args.methods, args.reps, modes=modes, kmin=kmin, kmax=kmax,
                         seed=args.seed, paper_compat=args.paper_compat, out=args.out)
    for w in out.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print("dgp method mode mean_asw se_asw mean_ari se_ari ppr reps")
    for s in out.summary:
        ppr = "-" if s.ppr is None else f"{s.ppr:.0f}"
        print(f"{s.dgp} {s.method} {s.mode} {s.mean_asw:.3f} {s.se_asw:.3f} "
              f"{s.mean_ari:.3f} {s.se_ari:.3f} {ppr} {s.reps}")
    return 0


def _cmd_eval(args) -> int:
    pred, truth = io.read_labels(args.pred), io.read_labels(args.truth)
    print(repr(ari(pred, truth)))
    return 0


def _cmd_axioms(args) -> int:
    reports = run_suites(args.suite)
    for r in reports:
        print(r.line())
        for f in r.failures[:10]:
            print(f"  {f}")
    return 0 if all(r.passed for r in reports) else 1


def _cmd_bench(args) -> int:
    sizes = args.sizes or list(range(args.nmin, args.nmax + 1, args.step))
    if not sizes or min(sizes) < 20:
        raise ValidationError("bench sizes must be at least 20")
    rows = []
    for n in sizes:
        data = generate(DgpSpec("fig1", seed=args.seed, n=n))
        for method in ("osil", "fosil"):
            t0 = time.perf_counter()
            res = sweep(data, method, 4, 4, seed=args.seed)
            seconds = time.perf_counter() - t0
            rows.append({"n": n, "method": method, "seconds": seconds, "asw": res.asw,
                         "ari": ari(res.partition, data.labels)})
            print(f"n={n} {method}: {seconds:.3f}s asw={res.asw:.4f} ari={rows[-1]['ari']:.4f}")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    io.write_table(args.out, ("n", "method", "seconds", "asw", "ari"), rows)
    return 0


def _cmd_generate(args) -> int:
    data = generate(DgpSpec(parse_id(args.dgp), seed=args.seed, n=args.n, paper_compat=args.paper_compat))
    if args.append:
        extra = np.array(args.append, dtype=float)
        if extra.ndim != 2 or extra.shape[1] != data.p:
            raise ValidationError(f"appended rows need {data.p} coordinates each")
        labels = np.concatenate([data.labels.codes, data.labels.k + np.arange(len(extra))])
        data = Dataset(np.vstack([data.points, extra]), Partition.from_codes(labels), data.meta)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    io.write_dataset(args.out, data)
    print(f"wrote n={data.n} p={data.p} -> {args.out}")
    return 0


COMMANDS = {"cluster": _cmd_cluster, "simulate": _cmd_simulate, "eval": _cmd_eval,
            "axioms": _cmd_axioms, "bench": _cmd_bench, "generate": _cmd_generate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
