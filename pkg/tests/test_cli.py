"""Command-line behavior: artifacts, exit codes, and reproducibility."""

import csv
import json

import numpy as np

from georesnet import cli, data, network


def write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh)
    return str(path)


def gen_args(out, extra=()):
    return ["gen-data", "--experiment", "exp1", "--train-size", "6",
            "--test-size", "4", "--seed", "3", "--out", str(out), *extra]


# --- gen-data ---------------------------------------------------------------

def test_gen_data_writes_datasets_and_meta(tmp_path, capsys):
    config = write_json(tmp_path / "cfg.json", {"steps": 64})
    code = cli.main(gen_args(tmp_path / "d", ["--config", config]))
    assert code == 0
    train_ds = data.load_dataset(tmp_path / "d" / "train.json")
    test_ds = data.load_dataset(tmp_path / "d" / "test.json")
    assert len(train_ds) == 6 and len(test_ds) == 4
    assert train_ds.metadata["steps"] == 64
    meta = json.loads((tmp_path / "d" / "meta.json").read_text())
    assert meta["command"] == "gen-data" and meta["seed"] == 3
    out = capsys.readouterr().out
    assert "train: 6 pairs" in out


def test_gen_data_is_bitwise_reproducible(tmp_path):
    config = write_json(tmp_path / "cfg.json", {"steps": 32})
    assert cli.main(gen_args(tmp_path / "a", ["--config", config])) == 0
    assert cli.main(gen_args(tmp_path / "b", ["--config", config])) == 0
    for name in ("train.json", "test.json", "meta.json"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


def test_gen_data_optional_csv_export(tmp_path):
    config = write_json(tmp_path / "cfg.json", {"steps": 32})
    assert cli.main(gen_args(tmp_path / "d", ["--config", config, "--csv"])) == 0
    with open(tmp_path / "d" / "train.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "x0_1"
    assert len(rows) == 1 + 6


def test_unknown_experiment_fails_cleanly(tmp_path, capsys):
    code = cli.main(["gen-data", "--experiment", "exp9",
                     "--out", str(tmp_path / "d")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


# --- train ------------------------------------------------------------------

def make_data_dir(tmp_path):
    config = write_json(tmp_path / "gen.json", {"steps": 64})
    assert cli.main(gen_args(tmp_path / "data", ["--config", config])) == 0
    return tmp_path / "data"


def test_train_writes_metrics_checkpoint_meta(tmp_path, capsys):
    data_dir = make_data_dir(tmp_path)
    config = write_json(tmp_path / "train.json", {"epochs": 3})
    out = tmp_path / "run"
    code = cli.main(["train", "--model", "manifold", "--experiment", "exp1",
                     "--layers", "2", "--data", str(data_dir),
                     "--config", config, "--seed", "1", "--out", str(out)])
    assert code == 0
    with open(out / "metrics.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 1 + 3
    cfg, params, meta = network.load_checkpoint(out / "checkpoint.json")
    assert cfg.layers == 2 and meta["status"] == "ok"
    doc = json.loads((out / "meta.json").read_text())
    assert doc["param_count"] == 20
    assert doc["train_config"]["seed"] == 1
    assert doc["epochs_recorded"] == 3
    assert doc["final_mean_test_defect"] <= 1e-12
    assert "[ok]" in capsys.readouterr().out


def test_train_runs_are_bitwise_reproducible(tmp_path):
    data_dir = make_data_dir(tmp_path)
    config = write_json(tmp_path / "train.json", {"epochs": 4})
    runs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert cli.main(["train", "--model", "classical", "--experiment", "exp1",
                         "--layers", "1", "--data", str(data_dir),
                         "--config", config, "--out", str(out)]) == 0
        runs.append((out / "metrics.csv").read_bytes())
    assert runs[0] == runs[1]


def test_train_divergence_exits_3_with_partial_metrics(tmp_path, capsys):
    data_dir = make_data_dir(tmp_path)
    config = write_json(tmp_path / "train.json", {"epochs": 40, "lr0": 1e8})
    out = tmp_path / "run"
    code = cli.main(["train", "--model", "classical", "--experiment", "exp1",
                     "--layers", "1", "--data", str(data_dir),
                     "--config", config, "--out", str(out)])
    assert code == 3
    assert "diverged" in capsys.readouterr().err
    doc = json.loads((out / "meta.json").read_text())
    assert doc["status"] == "diverged"
    with open(out / "metrics.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert 1 < len(rows) < 1 + 40  # some epochs recorded, not all


def test_train_rejects_unknown_config_keys(tmp_path):
    data_dir = make_data_dir(tmp_path)
    config = write_json(tmp_path / "train.json", {"learning_rate": 1.0})
    code = cli.main(["train", "--model", "manifold", "--experiment", "exp1",
                     "--layers", "1", "--data", str(data_dir),
                     "--config", config, "--out", str(tmp_path / "run")])
    assert code == 1


# --- sweep ------------------------------------------------------------------

def test_sweep_requires_an_experiment_or_spec(tmp_path, capsys):
    code = cli.main(["sweep", "--out", str(tmp_path / "out")])
    assert code == 2
    assert "needs --experiment" in capsys.readouterr().err


def test_sweep_from_a_spec_file(tmp_path, capsys):
    spec = {"experiment": "exp1", "manifold_layers": [1], "classical_layers": [1],
            "seeds": [0, 1], "train": {"epochs": 2}, "p_train": 4, "p_test": 4,
            "data_seed": 7}
    config = write_json(tmp_path / "spec.json", spec)
    out = tmp_path / "out"
    code = cli.main(["sweep", "--config", config, "--out", str(out)])
    assert code == 0
    assert (out / "sweep.csv").exists()
    assert (out / "sweep.svg").exists()
    assert (out / "spec.json").exists()
    meta = json.loads((out / "meta.json").read_text())
    assert meta["cells"] == 4
    assert "median test loss" in capsys.readouterr().out


# --- check ------------------------------------------------------------------

def test_check_suites_pass_and_report(tmp_path, capsys):
    for suite in ("invariants", "gradcheck", "bracket", "integrator"):
        out = tmp_path / suite
        code = cli.main(["check", suite, "--out", str(out)])
        text = capsys.readouterr().out
        assert code == 0, f"{suite} failed:\n{text}"
        assert "ok  " in text and "FAIL" not in text
        doc = json.loads((out / f"check-{suite}.json").read_text())
        assert doc["passed"] is True
        assert all(c["passed"] for c in doc["checks"])


def test_check_runs_without_an_output_directory(capsys):
    assert cli.main(["check", "bracket"]) == 0
    assert "bracket generating" in capsys.readouterr().out
