"""Command-line interface.

    concept-forge generate {figure1,cost-quality,blobs} --out DIR
    concept-forge evaluate --dataset D --partition P --model M --out DIR
    concept-forge identify --dataset D --partition P --concepts 3 --out DIR
    concept-forge represent --dataset D --partition P --model M --out DIR

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import kernels
from .cmaes import CMAESError
from .cqm import NONE, CqmConfig, CqmReport, evaluate
from .dataset import (Dataset, DatasetError, DescriptionSpacePartition, PreferenceSet, load_dataset,
                      load_partition, load_preferences, normalize, save_csv, save_partition)
from .optimizer import OptimizerConfig, OptimizerError, multi_restart
from .regions import RegionError, genome_length, load_grid, save_grid
from .represent import METHODS, select_representatives
from .synthgen import AIRFOIL_SETUPS, BlobSpec, blobs, cost_quality_demo, enclosing_grid, figure1_fixture

log = logging.getLogger("concept_forge")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4
SEED_ENV = "CONCEPT_FORGE_SEED"

MODEL_FILE = "model.json"
REPORT_FILE = "report.json"
LABELS_FILE = "labels.csv"
TRACE_FILE = "trace.jsonl"
HULLS_FILE = "hulls.csv"
REPRESENTATIVES_FILE = "representatives.json"


class ConfigError(ValueError):
    pass


# name -> (type, default); also the accepted keys of a --config file
RUN_KEYS = {
    "dataset": (str, None),
    "partition": (str, None),
    "prefs": (str, None),
    "model": (str, None),
    "concepts": (int, 3),
    "s": (float, 0.01),
    "p": (float, 0.01),
    "population": (int, 200),
    "generations": (int, 320),
    "sigma": (float, 0.15),
    "seed": (int, None),
    "restarts": (int, 1),
    "threads": (int, 1),
    "out": (str, None),
    "space": (int, 0),
    "method": (str, METHODS[0]),
}


def _add_run_flags(p: argparse.ArgumentParser, *names: str) -> None:
    p.add_argument("--config", help="JSON file with run settings; flags override it")
    for name in names:
        typ, default = RUN_KEYS[name]
        # defaults are applied after merging with the config file
        p.add_argument(f"--{name}", type=typ, default=None,
                       help=f"(default: {default})" if default is not None else None)


def resolve_config(args: argparse.Namespace, names: list[str]) -> dict:
    cfg: dict = {}
    if getattr(args, "config", None):
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(doc) - set(RUN_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for k, v in doc.items():
            try:
                cfg[k] = RUN_KEYS[k][0](v) if v is not None else None
            except (TypeError, ValueError):
                raise ConfigError(f"config key {k!r} has invalid value {v!r}") from None
    for name in names:
        v = getattr(args, name, None)
        if v is not None:
            cfg[name] = v
        cfg.setdefault(name, RUN_KEYS[name][1])
    if "seed" in names and cfg.get("seed") is None:
        env = os.environ.get(SEED_ENV)
        try:
            cfg["seed"] = int(env) if env is not None else 0
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    for required in ("dataset", "partition", "out"):
        if required in names and not cfg.get(required):
            raise ConfigError(f"--{required} is required")
    return cfg


def _load_inputs(cfg: dict) -> tuple[Dataset, DescriptionSpacePartition, PreferenceSet | None]:
    d = normalize(load_dataset(cfg["dataset"]))
    partition = load_partition(cfg["partition"], d)
    prefs = load_preferences(cfg["prefs"]).validate(d) if cfg.get("prefs") else None
    return d, partition, prefs


def _cqm_config(cfg: dict) -> CqmConfig:
    try:
        return CqmConfig(cfg["s"], cfg["p"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    return out


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def write_labels(path: Path, labels: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample", "concept"])
        for i, lab in enumerate(labels.tolist()):
            w.writerow([i, "none" if lab == NONE else lab + 1])


def _hull_2d(pts: np.ndarray) -> np.ndarray:
    uniq = np.unique(pts, axis=0)
    if len(uniq) < 3:
        return uniq
    try:
        return uniq[ConvexHull(uniq).vertices]
    except QhullError:
        # collinear members: the hull is the segment between the extreme points
        order = np.lexsort((uniq[:, 1], uniq[:, 0]))
        return uniq[[order[0], order[-1]]]


def write_hulls(path: Path, report: CqmReport, d: Dataset, partition: DescriptionSpacePartition) -> None:
    """Convex hull of each concept's members, per feature pair inside each space.

    One-dimensional spaces get the member interval (two rows, empty y).
    """
    labels = report.labels
    names = d.feature_names
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["concept", "space", "feature_x", "feature_y", "vertex", "x", "y"])
        for a in range(report.assignment.n_concepts):
            members = d.samples[labels == a]
            if len(members) == 0:
                continue
            for k, feats in enumerate(partition.spaces):
                if len(feats) == 1:
                    col = members[:, feats[0]]
                    for v, x in enumerate((col.min(), col.max())):
                        w.writerow([a + 1, k + 1, names[feats[0]], "", v, repr(float(x)), ""])
                    continue
                for i in range(len(feats)):
                    for j in range(i + 1, len(feats)):
                        hull = _hull_2d(members[:, [feats[i], feats[j]]])
                        for v, (x, y) in enumerate(hull.tolist()):
                            w.writerow([a + 1, k + 1, names[feats[i]], names[feats[j]], v, repr(x), repr(y)])


def cmd_generate(args: argparse.Namespace) -> int:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    if args.kind == "figure1":
        d, partition, grid = figure1_fixture()
        save_csv(d, out / "dataset.csv")
        save_partition(partition, out / "partition.json")
        save_grid(grid, out / MODEL_FILE, partition)
        _write_json(out / "ground_truth.json", {
            "kind": "figure1",
            "s": 0.15,
            "concept_sets": [[2, 3], [7], [10]],
            "expected_total_q": 0.033,
        })
    elif args.kind == "cost-quality":
        if args.n < 4:
            raise ConfigError("cost-quality needs -n >= 4")
        d, parts = cost_quality_demo(args.n, args.seed)
        save_csv(d, out / "dataset.csv")
        save_partition(parts["separate"], out / "partition.json")
        save_partition(parts["joint"], out / "partition_joint.json")
        _write_json(out / "ground_truth.json", {"kind": "cost-quality", "n": args.n, "seed": args.seed})
    else:
        try:
            dims = tuple(int(x) for x in args.dims.split(","))
        except ValueError:
            raise ConfigError(f"--dims must be comma-separated integers, got {args.dims!r}") from None
        try:
            spec = BlobSpec.separated(dims, args.concepts, args.n, args.consistency, args.seed, args.spread)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        sample = blobs(spec)
        save_csv(sample.dataset, out / "dataset.csv")
        save_partition(sample.partition, out / "partition.json")
        save_grid(enclosing_grid(spec, sample.dataset), out / MODEL_FILE, sample.partition)
        _write_json(out / "ground_truth.json", {
            "kind": "blobs",
            "spec": spec.to_json_dict(),
            "genome_length": genome_length(dims, args.concepts),
            "labels": sample.labels.tolist(),
            "identities": sample.identities.tolist(),
        })
    log.info("wrote %s data to %s", args.kind, out)
    return EXIT_OK


EVALUATE_KEYS = ["dataset", "partition", "prefs", "model", "s", "p", "out"]


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = resolve_config(args, EVALUATE_KEYS)
    if not cfg.get("model"):
        raise ConfigError("--model is required")
    d, partition, prefs = _load_inputs(cfg)
    grid = load_grid(cfg["model"])
    grid.check_partition(partition)
    report = evaluate(grid, d, partition, prefs, _cqm_config(cfg))
    out = _out_dir(cfg)
    _write_json(out / REPORT_FILE, report.to_json_dict())
    write_labels(out / LABELS_FILE, report.labels)
    print(f"total_q = {report.total_q:.6f}")
    return EXIT_OK


IDENTIFY_KEYS = ["dataset", "partition", "prefs", "concepts", "s", "p", "population", "generations",
                 "sigma", "seed", "restarts", "threads", "out"]


def cmd_identify(args: argparse.Namespace) -> int:
    cfg = resolve_config(args, IDENTIFY_KEYS)
    cqm_cfg = _cqm_config(cfg)
    try:
        opt_cfg = OptimizerConfig(n_concepts=cfg["concepts"], population=cfg["population"],
                                  generations=cfg["generations"], initial_sigma=cfg["sigma"],
                                  seed=cfg["seed"], restarts=cfg["restarts"], threads=cfg["threads"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    d, partition, prefs = _load_inputs(cfg)
    out = _out_dir(cfg)

    n_params = genome_length(partition.dims, opt_cfg.n_concepts)
    with open(out / TRACE_FILE, "w", encoding="utf-8") as trace:
        trace.write(json.dumps({
            "type": "header",
            "genome_length": n_params,
            "n_concepts": opt_cfg.n_concepts,
            "dims": list(partition.dims),
            "population": opt_cfg.population,
            "generations": opt_cfg.generations,
            "initial_sigma": opt_cfg.initial_sigma,
            "seeds": [opt_cfg.seed + r for r in range(opt_cfg.restarts)],
            "s": cqm_cfg.s,
            "p": cqm_cfg.p,
        }) + "\n")

        def on_generation(restart, rec):
            trace.write(json.dumps({"type": "generation", "restart": restart,
                                    "seed": opt_cfg.seed + restart, **rec.to_json_dict()}) + "\n")

        log.info("optimizing %d parameters (%s kernels)", n_params, kernels.BACKEND)
        result = multi_restart(d, partition, prefs, cqm_cfg, opt_cfg, on_generation)
        for res in result.results:
            trace.write(json.dumps({"type": "result", "seed": res.seed, "total_q": res.q}) + "\n")

    best = result.best
    save_grid(best.grid, out / MODEL_FILE, partition)
    doc = best.report.to_json_dict()
    doc["seed"] = best.seed
    doc["restarts"] = [{"seed": r.seed, "total_q": r.q} for r in result.results]
    _write_json(out / REPORT_FILE, doc)
    write_labels(out / LABELS_FILE, best.report.labels)
    write_hulls(out / HULLS_FILE, best.report, d, partition)
    print(f"total_q = {best.q:.6f} (seed {best.seed})")
    return EXIT_OK


REPRESENT_KEYS = ["dataset", "partition", "model", "space", "method", "out"]


def cmd_represent(args: argparse.Namespace) -> int:
    cfg = resolve_config(args, REPRESENT_KEYS)
    if not cfg.get("model"):
        raise ConfigError("--model is required")
    if cfg["method"] not in METHODS:
        raise ConfigError(f"--method must be one of {METHODS}")
    d, partition, _ = _load_inputs(cfg)
    grid = load_grid(cfg["model"])
    grid.check_partition(partition)
    if not 0 <= cfg["space"] < partition.n_spaces:
        raise ConfigError(f"--space must be in [0, {partition.n_spaces - 1}]")
    # membership does not depend on s or p
    report = evaluate(grid, d, partition)
    sel = select_representatives(report.assignment, d, partition, cfg["space"], cfg["method"])
    for a in sel.empty:
        print(f"warning: concept {a + 1} is empty; no representative", file=sys.stderr)
    _write_json(_out_dir(cfg) / REPRESENTATIVES_FILE, sel.to_json_dict())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="concept-forge", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset")
    g.add_argument("kind", choices=["figure1", "cost-quality", "blobs"])
    g.add_argument("-n", type=int, default=300, help="number of samples")
    g.add_argument("--dims", default="2,2", help=f"space dimensions, e.g. 4,2,2,2 (airfoil setups: "
                                                 f"{', '.join(','.join(map(str, v)) for v in AIRFOIL_SETUPS.values())})")
    g.add_argument("--concepts", type=int, default=3, help="number of blobs")
    g.add_argument("--consistency", type=float, default=1.0)
    g.add_argument("--spread", type=float, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("evaluate", help="score a saved model")
    _add_run_flags(e, *EVALUATE_KEYS)
    e.set_defaults(func=cmd_evaluate)

    i = sub.add_parser("identify", help="optimize concepts with CMA-ES")
    _add_run_flags(i, *IDENTIFY_KEYS)
    i.set_defaults(func=cmd_identify)

    r = sub.add_parser("represent", help="pick one archetype per concept")
    _add_run_flags(r, *REPRESENT_KEYS)
    r.set_defaults(func=cmd_represent)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DatasetError, RegionError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OptimizerError, CMAESError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        log.exception("unexpected failure")
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
