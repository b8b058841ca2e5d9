"""Command-line front end tests: artifacts, determinism, exit codes."""

import json
import os

import numpy as np
import pytest

from faircg.cli import main


BASE_CONFIG = """\
dataset:
  kind: synthetic
  n: 200
model:
  C: 6
  objective: hamming
  fairness:
    metric: equal-opportunity
    eps1: 0.1
limits: {cg: 10, pricing: 3, mip: 8}
mine:
  tree_depths: [1, 3]
  forest_sizes: [1]
train:
  holdout_fraction: 0.25
seed: 0
"""


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(BASE_CONFIG)
    return str(path)


def test_binarize_outputs_and_determinism(tmp_path, config_path):
    out1, out2 = str(tmp_path / "o1"), str(tmp_path / "o2")
    assert main(["binarize", "--config", config_path, "--out", out1]) == 0
    assert main(["binarize", "--config", config_path, "--out", out2]) == 0
    fm1 = open(os.path.join(out1, "feature_map.json")).read()
    fm2 = open(os.path.join(out2, "feature_map.json")).read()
    assert fm1 == fm2
    d1 = np.load(os.path.join(out1, "binary_data.npz"))
    d2 = np.load(os.path.join(out2, "binary_data.npz"))
    assert np.array_equal(d1["X"], d2["X"])
    meta = json.load(open(os.path.join(out1, "binarize_meta.json")))
    assert meta["n"] == d1["X"].shape[0]
    assert meta["config"] == BASE_CONFIG  # echoed verbatim


def test_train_writes_artifacts(tmp_path, config_path, capsys):
    out = str(tmp_path / "t")
    assert main(["train", "--config", config_path, "--out", out]) == 0
    for name in ("ruleset.json", "trace.csv", "metrics.json", "feature_map.json"):
        assert os.path.exists(os.path.join(out, name))
    metrics = json.load(open(os.path.join(out, "metrics.json")))
    assert "train" in metrics and "test" in metrics
    assert metrics["train"]["eq_opp_gap"] <= 0.1 + 1e-9
    assert metrics["config"] == BASE_CONFIG
    printed = capsys.readouterr().out
    assert "OR" in printed or "predict" in printed


def test_evaluate_roundtrip(tmp_path, config_path):
    out = str(tmp_path / "t")
    assert main(["train", "--config", config_path, "--out", out]) == 0
    out_eval = str(tmp_path / "e")
    code = main([
        "evaluate", "--config", config_path,
        "--ruleset", os.path.join(out, "ruleset.json"), "--out", out_eval,
    ])
    assert code == 0
    report = json.load(open(os.path.join(out_eval, "eval_metrics.json")))
    assert 0.0 <= report["accuracy"] <= 1.0


def test_frontier_small_grid(tmp_path):
    cfg = tmp_path / "f.yaml"
    cfg.write_text(
        """\
dataset: {kind: synthetic, n: 150}
model: {C: 5}
limits: {cg: 8, pricing: 2, mip: 5}
mine:
  tree_depths: [1, 3]
  forest_sizes: [1]
folds: {k: 2}
grid:
  metric: equal-opportunity
  eps: [0.1, 1.0]
  C: [4, 5]
seed: 0
"""
    )
    out = str(tmp_path / "fr")
    assert main(["frontier", "--config", str(cfg), "--out", out]) == 0
    frontier = open(os.path.join(out, "frontier.csv")).read().strip().splitlines()
    assert len(frontier) == 3  # header + one point per eps
    cells = open(os.path.join(out, "cells.csv")).read().strip().splitlines()
    assert len(cells) == 5  # header + 4 grid cells


def test_missing_config_field_is_config_error(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("model: {C: 5}\n")  # no dataset section
    assert main(["train", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_unreadable_config_is_config_error(tmp_path):
    assert main(["train", "--config", str(tmp_path / "nope.yaml")]) == 2


def test_bad_dataset_kind(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("dataset: {kind: nonsense}\n")
    assert main(["binarize", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_missing_recidivism_csv_is_data_error(tmp_path, monkeypatch):
    monkeypatch.delenv("FAIRCG_COMPAS_CSV", raising=False)
    cfg = tmp_path / "r.yaml"
    cfg.write_text("dataset: {kind: recidivism-csv, path: /nonexistent.csv}\n")
    assert main(["binarize", "--config", str(cfg), "--out", str(tmp_path)]) == 3


def test_mismatched_ruleset_feature_space(tmp_path, config_path):
    rs = tmp_path / "rs.json"
    rs.write_text(json.dumps({"clauses": [{"literals": [4000], "multiplicity": 1}]}))
    assert main([
        "evaluate", "--config", config_path, "--ruleset", str(rs), "--out", str(tmp_path)
    ]) == 3
