"""Command-line front end: binarize, train, frontier, evaluate.

Every command reads one YAML config and echoes it verbatim into each output
artifact, so a result directory is reproducible from itself plus the seed.
Exit codes: 0 success, 2 config error, 3 data error, 4 infeasible fairness
constraints, 5 timeout without incumbent, 6 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np
import yaml

from . import datasets
from .data import (
    CATEGORICAL,
    NUMERIC,
    binarize,
    ingest_csv,
    make_folds,
    preprocess_compas,
)
from .errors import ConfigError, DataError, FairCGError
from .master import NO_FAIRNESS, FairnessSpec, RuleSet
from .mine import MineGrid
from .colgen import ColGenConfig, train
from .evaluation import build_frontier, cross_validate, evaluate

log = logging.getLogger(__name__)


def _load_config(path):
    if not path:
        raise ConfigError("--config is required")
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return doc, text


def _require(doc, key, where="config"):
    if key not in doc:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return doc[key]


def _load_dataset(doc, seed):
    ds_cfg = _require(doc, "dataset")
    kind = ds_cfg.get("kind", "synthetic")
    quantiles = doc.get("binarize", {}).get("quantiles")
    quantiles = tuple(quantiles) if quantiles else None

    if kind == "synthetic":
        table = datasets.synthetic_recidivism(n=int(ds_cfg.get("n", 5278)), seed=seed)
        table = preprocess_compas(table, race_column=ds_cfg.get("race_column", "race"))
    elif kind == "recidivism-csv":
        path = ds_cfg.get("path") or datasets.find_recidivism_csv()
        if not path or not os.path.exists(path):
            raise DataError(
                "recidivism CSV not found; set dataset.path or the "
                f"{datasets.ENV_CSV} environment variable"
            )
        table = datasets.load_recidivism_csv(path)
    elif kind == "csv":
        schema = {}
        for name, k in _require(ds_cfg, "schema", "dataset").items():
            if k not in (NUMERIC, CATEGORICAL):
                raise ConfigError(f"dataset.schema.{name}: unknown kind {k!r}")
            schema[name] = k
        table = ingest_csv(
            _require(ds_cfg, "path", "dataset"),
            schema,
            group_column=_require(ds_cfg, "group_column", "dataset"),
            label_column=_require(ds_cfg, "label_column", "dataset"),
            positive_label=_require(ds_cfg, "positive_label", "dataset"),
        )
        rf = ds_cfg.get("race_filter")
        if rf:
            table = preprocess_compas(
                table, race_column=_require(rf, "column", "race_filter"),
                keep=tuple(rf.get("keep", ("African-American", "Caucasian"))),
            )
    else:
        raise ConfigError(f"dataset.kind must be synthetic|recidivism-csv|csv, got {kind!r}")

    return binarize(table) if quantiles is None else binarize(table, quantiles)


def _fairness_from(doc):
    f = doc.get("fairness", {}) or {}
    return FairnessSpec(
        metric=f.get("metric", NO_FAIRNESS),
        eps1=float(f.get("eps1", 1.0)),
        eps2=None if f.get("eps2") is None else float(f.get("eps2")),
    )


def _colgen_config(doc, args, seed, C=None, fairness=None):
    model = doc.get("model", {}) or {}
    limits = doc.get("limits", {}) or {}
    C = int(C if C is not None else model.get("C", 15))
    D = model.get("D")
    mine_cfg = doc.get("mine", {}) or {}
    grid_kwargs = {}
    if "tree_depths" in mine_cfg:
        grid_kwargs["tree_depths"] = tuple(mine_cfg["tree_depths"])
    if "forest_sizes" in mine_cfg:
        grid_kwargs["forest_sizes"] = tuple(mine_cfg["forest_sizes"])
    return ColGenConfig(
        C=C,
        objective=model.get("objective", "hamming"),
        fairness=fairness if fairness is not None else _fairness_from(model),
        D=min(int(D), C - 1) if D is not None else None,
        time_limit=float(args.time_limit_cg or limits.get("cg", 300)),
        time_limit_pricing=float(args.time_limit_pricing or limits.get("pricing", 45)),
        time_limit_mip=float(args.time_limit_mip or limits.get("mip", 600)),
        mine_grid=MineGrid(**grid_kwargs),
        seed=seed,
    )


def _outdir(args):
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write(out, name, payload, config_text):
    path = os.path.join(out, name)
    if name.endswith(".json"):
        payload = dict(payload)
        payload["config"] = config_text
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, default=str)
            fh.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(payload)
    return path


def cmd_binarize(args):
    doc, text = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    fm, ds = _load_dataset(doc, seed)
    out = _outdir(args)
    with open(os.path.join(out, "feature_map.json"), "w", encoding="utf-8") as fh:
        fh.write(fm.to_json())
        fh.write("\n")
    np.savez(os.path.join(out, "binary_data.npz"), X=ds.X, y=ds.y, g=ds.g.astype(str))
    _write(out, "binarize_meta.json", {"n": ds.n, "p": ds.p, "groups": ds.groups()}, text)
    print(f"binarized {ds.n} rows into {ds.p} features -> {out}")
    return 0


def _trace_csv(trace):
    lines = ["iteration,master_objective,columns_added,best_reduced_cost,certified,elapsed"]
    for it in trace.iterations:
        lines.append(
            f"{it.iteration},{it.master_objective!r},{it.columns_added},"
            f"{it.best_reduced_cost!r},{it.certified},{it.elapsed:.3f}"
        )
    return "\n".join(lines) + "\n"


def cmd_train(args):
    doc, text = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    fm, ds = _load_dataset(doc, seed)
    cfg = _colgen_config(doc, args, seed)

    holdout = float(doc.get("train", {}).get("holdout_fraction", 0.0) or 0.0)
    test_ds = None
    if holdout > 0:
        k = max(2, int(round(1.0 / holdout)))
        plan = make_folds(ds, k=k, seed=seed)
        train_ds = ds.subset(plan.train_rows(0))
        test_ds = ds.subset(plan.test_rows(0))
    else:
        train_ds = ds

    result = train(train_ds, cfg)
    rs = result.rule_set
    out = _outdir(args)
    with open(os.path.join(out, "ruleset.json"), "w", encoding="utf-8") as fh:
        fh.write(rs.to_json(feature_map_ref="feature_map.json"))
        fh.write("\n")
    with open(os.path.join(out, "feature_map.json"), "w", encoding="utf-8") as fh:
        fh.write(fm.to_json())
        fh.write("\n")
    _write(out, "trace.csv", _trace_csv(result.trace), text)

    metrics = {"train": evaluate(rs, train_ds).to_dict()}
    if test_ds is not None:
        metrics["test"] = evaluate(rs, test_ds).to_dict()
    metrics["termination"] = result.trace.termination
    metrics["mip_status"] = result.mip_status
    _write(out, "metrics.json", metrics, text)

    print("learned rule set (predict positive when):")
    print(rs.describe(fm))
    print(f"train accuracy {metrics['train']['accuracy']:.4f}, complexity {rs.complexity}")
    if test_ds is not None:
        print(f"test accuracy {metrics['test']['accuracy']:.4f}")
    return 0


def cmd_frontier(args):
    doc, text = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    _fm, ds = _load_dataset(doc, seed)
    grid_cfg = _require(doc, "grid")
    metric = _require(grid_cfg, "metric", "grid")
    eps_values = [float(e) for e in _require(grid_cfg, "eps", "grid")]
    c_values = [int(c) for c in _require(grid_cfg, "C", "grid")]

    cells_cfgs = []
    for eps in eps_values:
        for C in c_values:
            fairness = FairnessSpec(metric=metric, eps1=eps)
            cells_cfgs.append(_colgen_config(doc, args, seed, C=C, fairness=fairness))

    phase1 = None
    p1 = grid_cfg.get("phase1")
    if p1:
        phase1 = [
            _colgen_config(doc, args, seed, C=int(C), fairness=FairnessSpec(metric=metric, eps1=float(e)))
            for e in p1.get("eps", [1.0])
            for C in p1.get("C", [max(c_values)])
        ]

    folds = make_folds(ds, k=int(doc.get("folds", {}).get("k", 10)), seed=seed)
    cells = cross_validate(ds, folds, cells_cfgs, seed=seed, jobs=args.jobs or 1, phase1=phase1)
    points = build_frontier(cells)

    out = _outdir(args)
    with open(os.path.join(out, "frontier.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(points[0].to_dict()) if points else ["eps"])
        writer.writeheader()
        for pt in points:
            writer.writerow(pt.to_dict())
    with open(os.path.join(out, "cells.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["metric", "eps", "C", "infeasible", "test_accuracy_mean", "test_accuracy_std",
             "test_gap_mean", "test_gap_std", "train_gap_mean", "mean_complexity"]
        )
        for cell in cells:
            acc = cell.test_accuracy
            gap = cell.test_gap
            writer.writerow(
                [cell.metric, cell.eps, cell.C, cell.infeasible, acc[0], acc[1],
                 gap[0], gap[1], cell.train_gap[0], cell.mean_complexity]
            )
    _write(out, "frontier.json", {"points": [p.to_dict() for p in points]}, text)
    for pt in points:
        flag = " (dominated)" if pt.dominated else ""
        print(
            f"eps={pt.eps:g} C={pt.chosen_C}: accuracy {pt.accuracy_mean:.4f} "
            f"gap {pt.gap_mean:.4f}{flag}"
        )
    return 0


def cmd_evaluate(args):
    doc, text = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    if not args.ruleset:
        raise ConfigError("--ruleset is required for evaluate")
    try:
        with open(args.ruleset, encoding="utf-8") as fh:
            rs = RuleSet.from_json(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read ruleset {args.ruleset}: {exc}") from exc
    _fm, ds = _load_dataset(doc, seed)
    for clause in rs.clauses:
        for j in clause.literals:
            if j >= ds.p:
                raise DataError(
                    f"ruleset references feature {j} but the dataset has only {ds.p}; "
                    "feature map mismatch"
                )
    report = evaluate(rs, ds)
    out = _outdir(args)
    _write(out, "eval_metrics.json", report.to_dict(), text)
    print(json.dumps(report.to_dict(), indent=2, default=str))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="faircg",
        description="DNF rule sets with hard group-fairness constraints via column generation",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML run configuration")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None, help="output directory (default: cwd)")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--time-limit-cg", type=float, default=None)
    common.add_argument("--time-limit-pricing", type=float, default=None)
    common.add_argument("--time-limit-mip", type=float, default=None)

    sub.add_parser("binarize", parents=[common]).set_defaults(func=cmd_binarize)
    sub.add_parser("train", parents=[common]).set_defaults(func=cmd_train)
    sub.add_parser("frontier", parents=[common]).set_defaults(func=cmd_frontier)
    p_eval = sub.add_parser("evaluate", parents=[common])
    p_eval.add_argument("--ruleset", required=True, help="ruleset JSON produced by train")
    p_eval.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except FairCGError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
