"""Command-line front end.

Subcommands: synth (generate a benchmark dataset), run (one method on one
dataset), sweep (a method across seeds), info (describe a dataset or the
package). Exit codes: 2 configuration error, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import (
    coreg_mvsc,
    jd_refine_curve,
    mv_kmeans,
    mv_sph_kmeans,
    mvsc,
    order_modes,
    write_refine_curve,
)
from .errors import SpecmixError
from .evaluate import kmeans, landscape_stats, nmi, write_landscape_csv, write_report
from .graph import connectivity, normalized_laplacian, self_tuning_affinity
from .linalg import sym_eigh, combine_raw
from .matio import MatrixFormatError, ensure_dir, read_feature_csv, read_labels_csv, read_matrix
from .rjd import LaplacianStack, rjd_base, run_trial, write_trial_ledger
from .sbm import PRESETS, export_dataset, generate, preset
from .smoothness import PgaConfig, pga_maximize

METHODS = (
    "rjd-base",
    "pga-single",
    "pga-base",
    "mvsc",
    "coreg",
    "mv-kmeans",
    "mv-sphkmeans",
    "jd-refine",
    "single-laplacian",
)


class ConfigError(SpecmixError):
    """Bad flags, parameters or preset names."""


class DataError(SpecmixError):
    """Missing or malformed input files."""


def _env_int(name: str, fallback: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specmix",
        description="Multimodal spectral clustering via Laplacian mixtures.",
    )
    parser.add_argument("--version", action="version", version=f"specmix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI file; section per subcommand, flags override")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker pool size (default SPECMIX_THREADS or 1)")

    synth = sub.add_parser("synth", help="generate a synthetic multimodal dataset")
    common(synth)
    synth.add_argument("--preset", default="sbm-paper", choices=sorted(PRESETS))
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--n", type=int, default=None)
    synth.add_argument("--k", type=int, default=None)
    synth.add_argument("--concentration", type=float, default=None)
    synth.add_argument("--sigma", default=None,
                       help="comma-separated per-modality bandwidths")

    run = sub.add_parser("run", help="run one method on one dataset")
    common(run)
    _add_run_options(run)

    sweep = sub.add_parser("sweep", help="repeat a method across seeds")
    common(sweep)
    _add_run_options(sweep)
    sweep.add_argument("--seeds", type=int, default=20, help="number of seeds")
    sweep.add_argument("--seed-base", type=int, default=0)
    sweep.add_argument("--vary", choices=("method", "data", "both"), default="both")

    info = sub.add_parser("info", help="describe a dataset or the package")
    common(info)
    info.add_argument("--data", default=None)
    info.add_argument("--data-seed", type=int, default=0)
    info.add_argument("--nn-index", type=int, default=7)
    return parser


def _add_run_options(p) -> None:
    p.add_argument("--data", required=False, default="sbm-paper",
                   help="preset name or dataset directory")
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--seed", type=int, default=0, help="method seed")
    p.add_argument("--eval-seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=10, help="k-means restarts")
    p.add_argument("--k", type=int, default=None, help="clusters (defaults to dataset k)")
    p.add_argument("--trials", type=int, default=200, help="random mixtures to draw")
    p.add_argument("--sampler", choices=("normalized-uniform", "dirichlet"),
                   default="normalized-uniform")
    p.add_argument("--iterations", type=int, default=30, help="ascent iterations")
    p.add_argument("--step-size", type=float, default=0.5)
    p.add_argument("--coupling-rounds", type=int, default=5,
                   help="cross-view update rounds for mvsc/coreg")
    p.add_argument("--lam", type=float, default=0.5, help="coreg coupling strength")
    p.add_argument("--coreg-sign", choices=("reward", "printed"), default="reward")
    p.add_argument("--max-iters", type=int, default=100, help="co-EM iteration cap")
    p.add_argument("--nn-index", type=int, default=7, help="self-tuning neighbor")
    p.add_argument("--sweeps", type=int, default=20, help="diagonalization sweeps")
    p.add_argument("--jd-tol", type=float, default=1e-10)
    p.add_argument("--init", choices=("rjd-base", "identity"), default="rjd-base",
                   help="jd-refine starting basis")
    p.add_argument("--modality", type=int, default=0, help="single-laplacian view index")
    p.add_argument("--no-landscape", action="store_true",
                   help="skip per-trial clustering statistics")


_BOOL = {"true": True, "false": False, "yes": True, "no": False}


def _coerce(raw: str):
    low = raw.strip().lower()
    if low in _BOOL:
        return _BOOL[low]
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw


def _apply_config_file(parser, argv):
    """Pre-parse for --config, then feed the matching INI section in as
    defaults so explicit flags keep priority."""
    ns, _ = parser.parse_known_args(argv)
    path = getattr(ns, "config", None)
    if not path:
        return parser.parse_args(argv)
    if not Path(path).is_file():
        raise ConfigError(f"config file not found: {path}")
    ini = configparser.ConfigParser()
    try:
        ini.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"bad config file {path}: {exc}") from exc
    section = ns.command
    overrides = {}
    if ini.has_section(section):
        for key, value in ini.items(section):
            overrides[key.replace("-", "_")] = _coerce(value)
    ns = parser.parse_args(argv)
    explicit = _explicit_dests(argv)
    for key, value in overrides.items():
        if not hasattr(ns, key):
            raise ConfigError(f"unknown config key {key!r} in section [{section}]")
        if key not in explicit:
            setattr(ns, key, value)
    return ns


def _explicit_dests(argv) -> set:
    dests = set()
    for token in argv:
        if token.startswith("--"):
            dests.add(token[2:].split("=")[0].replace("-", "_"))
    return dests


class Dataset:
    """Resolved input: a Laplacian stack plus whatever else the source had."""

    def __init__(self, stack, affinities, labels, views, provenance):
        self.stack = stack
        self.affinities = affinities
        self.labels = labels
        self.views = views
        self.provenance = provenance

    @property
    def default_k(self):
        return self.provenance.get("config", {}).get("k")


def _load_directory(path: Path, nn_index: int) -> Dataset:
    labels = None
    labels_path = path / "labels.csv"
    if labels_path.is_file():
        labels = read_labels_csv(labels_path)
    bins = sorted(p for p in path.glob("*.bin"))
    if bins:
        affinities = [read_matrix(p) for p in bins]
        provenance = {"kind": "affinity-dir", "source": str(path),
                      "files": [p.name for p in bins]}
        prov_path = path / "provenance.json"
        if prov_path.is_file():
            import json
            with open(prov_path) as fh:
                stored = json.load(fh)
            provenance.update(stored)
        laplacians = [normalized_laplacian(a) for a in affinities]
        return Dataset(LaplacianStack(laplacians), affinities, labels, None, provenance)
    csvs = sorted(p for p in path.glob("*.csv") if p.name != "labels.csv")
    if not csvs:
        raise DataError(f"{path}: no affinity binaries or feature CSVs found")
    views = [read_feature_csv(p) for p in csvs]
    sizes = {v.n for v in views}
    if len(sizes) != 1:
        raise DataError(f"{path}: views disagree on the sample count {sorted(sizes)}")
    affinities = [self_tuning_affinity(v, nn_index=nn_index) for v in views]
    laplacians = [normalized_laplacian(a) for a in affinities]
    provenance = {"kind": "feature-dir", "source": str(path),
                  "files": [p.name for p in csvs], "nn_index": nn_index}
    return Dataset(LaplacianStack(laplacians), affinities, labels, views, provenance)


def resolve_dataset(source: str, data_seed: int, nn_index: int) -> Dataset:
    if source in PRESETS:
        config = preset(source, seed=data_seed)
        ds = generate(config)
        provenance = {"kind": "synthetic", "preset": source, "config": config.to_dict()}
        return Dataset(ds.stack, list(ds.affinities), ds.labels.assignments, None, provenance)
    path = Path(source)
    if path.is_dir():
        try:
            return _load_directory(path, nn_index)
        except (MatrixFormatError, OSError) as exc:
            raise DataError(str(exc)) from exc
    raise DataError(f"dataset source {source!r} is neither a preset nor a directory")


def _resolve_k(args, dataset: Dataset) -> int:
    if args.k is not None:
        if args.k < 1:
            raise ConfigError("k must be at least 1")
        return args.k
    k = dataset.default_k
    if k is None:
        raise ConfigError("dataset does not define k; pass --k")
    return int(k)


def _execute_method(args, dataset: Dataset, k: int, threads: int) -> dict:
    """Run one method once. Returns result fields plus private extras
    (keys starting with '_') that cmd_run turns into files."""
    stack = dataset.stack
    labels = dataset.labels
    out: dict = {"nmi": None}

    def score(embedding_or_rows) -> float | None:
        predicted = kmeans(embedding_or_rows, k, restarts=args.restarts, seed=args.eval_seed)
        out["_predicted"] = predicted
        return None if labels is None else nmi(predicted, labels)

    method = args.method
    if method == "rjd-base":
        selected, trials = rjd_base(stack, args.trials, k, args.seed,
                                    sampler=args.sampler, threads=threads)
        out["nmi"] = score(selected.embedding)
        out["objective"] = selected.objective
        out["selected_trial"] = selected.trial_index
        out["mu"] = [float(w) for w in selected.mu.weights]
        out["_trials"] = trials
        if labels is not None and not args.no_landscape:
            summary = landscape_stats(trials, labels, k, eval_seed=args.eval_seed,
                                      restarts=args.restarts)
            out["mean_trial_nmi"] = summary.mean_nmi
            out["std_trial_nmi"] = summary.std_nmi
            out["above_mean"] = summary.above_mean
            out["nmi"] = summary.selected_nmi
            out["_landscape"] = summary
    elif method in ("pga-base", "pga-single"):
        kind = "base" if method == "pga-base" else "single-directional"
        config = PgaConfig(k=k, iterations=args.iterations, step_size=args.step_size,
                           objective_kind=kind, eval_restarts=args.restarts,
                           eval_seed=args.eval_seed)
        mu, trace = pga_maximize(stack, config, labels=labels)
        final = run_trial(stack, k, mu)
        out["nmi"] = score(final.embedding)
        out["objective"] = trace.final().objective
        out["mu"] = [float(w) for w in mu.weights]
        out["_trace"] = trace
    elif method == "mvsc":
        rows = mvsc(dataset.affinities, k, iterations=args.coupling_rounds)
        out["nmi"] = score(rows)
    elif method == "coreg":
        rows = coreg_mvsc(stack, k, lam=args.lam, iterations=args.coupling_rounds,
                          reward_agreement=args.coreg_sign == "reward")
        out["nmi"] = score(rows)
    elif method in ("mv-kmeans", "mv-sphkmeans"):
        if dataset.views is None or len(dataset.views) != 2:
            raise ConfigError(f"{method} needs a dataset of exactly two feature views")
        fn = mv_kmeans if method == "mv-kmeans" else mv_sph_kmeans
        predicted = fn(dataset.views, k, max_iters=args.max_iters, seed=args.seed)
        out["_predicted"] = predicted
        out["nmi"] = None if labels is None else nmi(predicted, labels)
    elif method == "jd-refine":
        if args.init == "rjd-base":
            selected, _ = rjd_base(stack, args.trials, k, args.seed,
                                   sampler=args.sampler, threads=threads)
            combined = combine_raw(stack.matrices, selected.mu.weights)
            init = sym_eigh(combined, stack.n).vectors
            out["mu"] = [float(w) for w in selected.mu.weights]
        else:
            init = None
        result, curve = jd_refine_curve(stack, k, init=init, sweeps=args.sweeps,
                                        tol=args.jd_tol, labels=labels,
                                        eval_seed=args.eval_seed,
                                        eval_restarts=args.restarts)
        embedding = order_modes(result.basis, stack, k)
        out["nmi"] = score(embedding)
        out["sweeps"] = result.sweeps
        out["offdiag_mass"] = float(result.offdiag_history[-1])
        out["_curve"] = curve
    elif method == "single-laplacian":
        if not 0 <= args.modality < stack.m:
            raise ConfigError(f"--modality must be in [0, {stack.m})")
        pairs = sym_eigh(stack.matrices[args.modality], k + 1)
        out["nmi"] = score(pairs.vectors[:, 1:k + 1])
        out["modality"] = args.modality
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown method {method!r}")
    return out


def _echo_params(args, k: int, threads: int) -> dict:
    return {
        "method": args.method,
        "data": args.data,
        "data_seed": args.data_seed,
        "seed": args.seed,
        "eval_seed": args.eval_seed,
        "restarts": args.restarts,
        "k": k,
        "trials": args.trials,
        "sampler": args.sampler,
        "iterations": args.iterations,
        "step_size": args.step_size,
        "coupling_rounds": args.coupling_rounds,
        "lam": args.lam,
        "coreg_sign": args.coreg_sign,
        "max_iters": args.max_iters,
        "nn_index": args.nn_index,
        "sweeps": args.sweeps,
        "jd_tol": args.jd_tol,
        "init": args.init,
        "modality": args.modality,
        "threads": threads,
    }


def _outdir(args, fallback: str) -> Path:
    base = args.out or os.environ.get("SPECMIX_OUTDIR") or fallback
    return ensure_dir(base)


def _threads(args) -> int:
    value = args.threads if args.threads is not None else _env_int("SPECMIX_THREADS", 1)
    if value < 1:
        raise ConfigError("--threads must be at least 1")
    return value


def cmd_synth(args) -> int:
    try:
        config = preset(args.preset, seed=args.seed)
        import dataclasses
        updates = {}
        if args.n is not None:
            updates["n"] = args.n
        if args.k is not None:
            updates["k"] = args.k
        if args.concentration is not None:
            updates["dirichlet_concentration"] = args.concentration
        if args.sigma is not None:
            updates["sigma_per_modality"] = tuple(float(s) for s in args.sigma.split(","))
        if updates:
            config = dataclasses.replace(config, **updates)
    except (ValueError, SpecmixError) as exc:
        raise ConfigError(str(exc)) from exc
    dataset = generate(config)
    out = _outdir(args, "specmix_out/synth")
    export_dataset(dataset, out)
    print(f"wrote {dataset.m}-modality dataset (n={dataset.n}, k={config.k}) to {out}")
    return 0


def cmd_run(args) -> int:
    threads = _threads(args)
    dataset = resolve_dataset(args.data, args.data_seed, args.nn_index)
    try:
        k = _resolve_k(args, dataset)
        start = time.perf_counter()
        result = _execute_method(args, dataset, k, threads)
        elapsed = time.perf_counter() - start
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _outdir(args, "specmix_out/run")
    outputs = {}
    if "_trials" in result:
        write_trial_ledger(result["_trials"], out / "trials.csv")
        outputs["trials"] = "trials.csv"
    if "_landscape" in result:
        write_landscape_csv(result["_trials"], result["_landscape"].per_trial_nmi,
                            out / "landscape.csv")
        outputs["landscape"] = "landscape.csv"
    if "_trace" in result:
        result["_trace"].to_csv(out / "trace.csv")
        outputs["trace"] = "trace.csv"
    if "_curve" in result:
        write_refine_curve(result["_curve"], out / "refine_curve.csv")
        outputs["refine_curve"] = "refine_curve.csv"
    if "_predicted" in result:
        from .matio import write_labels_csv
        write_labels_csv(out / "predicted.csv", result["_predicted"].assignments)
        outputs["predicted"] = "predicted.csv"
    report = {
        "command": "run",
        "params": _echo_params(args, k, threads),
        "dataset": dataset.provenance,
        "results": {key: value for key, value in result.items() if not key.startswith("_")},
        "outputs": outputs,
        "wall_clock_seconds": elapsed,
    }
    write_report(out / "report.json", report)
    shown = "n/a" if result["nmi"] is None else f"{result['nmi']:.4f}"
    print(f"{args.method}: nmi={shown} ({elapsed:.2f}s), report at {out / 'report.json'}")
    return 0


def cmd_sweep(args) -> int:
    threads = _threads(args)
    if args.seeds < 1:
        raise ConfigError("--seeds must be at least 1")
    rows = []
    for offset in range(args.seeds):
        data_seed = args.seed_base + offset if args.vary in ("data", "both") else args.data_seed
        method_seed = args.seed_base + offset if args.vary in ("method", "both") else args.seed
        dataset = resolve_dataset(args.data, data_seed, args.nn_index)
        k = _resolve_k(args, dataset)
        local = argparse.Namespace(**vars(args))
        local.seed = method_seed
        local.data_seed = data_seed
        start = time.perf_counter()
        try:
            result = _execute_method(local, dataset, k, threads)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        elapsed = time.perf_counter() - start
        rows.append({
            "seed": args.seed_base + offset,
            "data_seed": data_seed,
            "method_seed": method_seed,
            "nmi": result.get("nmi"),
            "objective": result.get("objective"),
            "mean_trial_nmi": result.get("mean_trial_nmi"),
            "std_trial_nmi": result.get("std_trial_nmi"),
            "above_mean": result.get("above_mean"),
            "wall_clock_seconds": elapsed,
        })
    out = _outdir(args, "specmix_out/sweep")
    import csv as _csv
    columns = ["seed", "data_seed", "method_seed", "nmi", "objective",
               "mean_trial_nmi", "std_trial_nmi", "above_mean", "wall_clock_seconds"]
    with open(out / "seeds.csv", "w", newline="") as fh:
        writer = _csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({c: ("" if row[c] is None else row[c]) for c in columns})
    flags = [row["above_mean"] for row in rows if row["above_mean"] is not None]
    scores = [row["nmi"] for row in rows if row["nmi"] is not None]
    summary = {
        "command": "sweep",
        "params": _echo_params(args, args.k if args.k is not None else -1, threads),
        "seeds": args.seeds,
        "seed_base": args.seed_base,
        "vary": args.vary,
        "mean_nmi": float(np.mean(scores)) if scores else None,
        "above_mean_fraction": float(np.mean(flags)) if flags else None,
        "outputs": {"rows": "seeds.csv"},
    }
    write_report(out / "report.json", summary)
    frac = "n/a" if not flags else f"{np.mean(flags):.2f}"
    mean = "n/a" if not scores else f"{np.mean(scores):.4f}"
    print(f"sweep of {args.method} over {args.seeds} seeds: mean nmi={mean}, "
          f"above-mean fraction={frac}, rows at {out / 'seeds.csv'}")
    return 0


def cmd_info(args) -> int:
    if args.data is None:
        print(f"specmix {__version__}")
        print("methods: " + ", ".join(METHODS))
        print("presets: " + ", ".join(sorted(PRESETS)))
        return 0
    dataset = resolve_dataset(args.data, args.data_seed, args.nn_index)
    stack = dataset.stack
    print(f"kind: {dataset.provenance.get('kind')}")
    print(f"samples: {stack.n}")
    print(f"modalities: {stack.m}")
    print(f"labels: {'present' if dataset.labels is not None else 'absent'}")
    for i, affinity in enumerate(dataset.affinities):
        weights = affinity.weights if hasattr(affinity, "weights") else affinity
        pieces = connectivity(weights)
        print(f"modality_{i}: connected components (threshold 0) = {pieces}")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = _apply_config_file(parser, argv)
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_info(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except SpecmixError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
