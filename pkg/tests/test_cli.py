import json
import subprocess
import sys

import numpy as np
import pytest

from pfgap.cli import EXIT_FAILED, EXIT_INVALID, EXIT_OK, main
from pfgap.dataio import load_tsv, read_embedding_csv, read_matrix_csv
from pfgap.forest import ProximityForest
from pfgap.outlier import OutlierReport


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["synth", "--classes", "2", "--per-class", "8", "--length", "30",
                 "--noise", "0.1", "--seed", "7", "--out", "d.tsv"]) == EXIT_OK
    return tmp_path


@pytest.fixture
def trained(workdir):
    assert main(["train", "--data", "d.tsv", "--trees", "10", "--r", "5", "--seed", "42",
                 "--out", "m"]) == EXIT_OK
    return workdir


def test_synth_stdout(capsys):
    assert main(["synth", "--classes", "3", "--per-class", "2", "--length", "5"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 6 and all(len(r.split("\t")) == 6 for r in lines)


def test_train_writes_model(trained):
    pf = ProximityForest.load(trained / "m" / "model.json")
    assert pf.n_trees == 10
    cfg = json.loads((trained / "m" / "config.json").read_text())
    assert cfg["forest"]["seed"] == 42


def test_train_reproducible(trained):
    first = (trained / "m" / "model.json").read_bytes()
    assert main(["train", "--data", "d.tsv", "--trees", "10", "--seed", "42", "--n-jobs", "2",
                 "--out", "m2"]) == EXIT_OK
    a = json.loads(first)
    b = json.loads((trained / "m2" / "model.json").read_text())
    assert a["trees"] == b["trees"]


@pytest.mark.parametrize("fmt", ["dense", "sparse"])
@pytest.mark.parametrize("kind", ["gap", "original"])
def test_prox(trained, fmt, kind):
    out = trained / f"p_{kind}_{fmt}.csv"
    assert main(["prox", "--model", "m/model.json", "--format", fmt, "--kind", kind,
                 "--out", str(out)]) == EXIT_OK
    M = read_matrix_csv(out)
    assert M.shape == (16, 16)
    if kind == "gap":
        pf = ProximityForest.load(trained / "m" / "model.json")
        rows = M.sum(axis=1)[pf.oob_mask_.any(axis=0)]
        np.testing.assert_allclose(rows, 1.0, atol=1e-9)


def test_embed_with_svg(trained):
    assert main(["prox", "--model", "m/model.json", "--dissim", "dg.csv"]) == EXIT_OK
    for mode in ("metric", "nonmetric"):
        assert main(["embed", "--dissim", "dg.csv", "--mds", mode, "--dim", "2", "--svg",
                     "--model", "m/model.json"]) == EXIT_OK
        X, labels = read_embedding_csv(trained / f"dg_{mode}.csv")
        assert X.shape == (16, 2) and set(labels) == {"1", "2"}
        svg = (trained / f"dg_{mode}.svg").read_text()
        assert svg.lstrip().startswith("<?xml") and "#ff0000" in svg


def test_embed_rejects_bad_matrix(workdir):
    (workdir / "bad.csv").write_text("0,1\n2,0\n")
    assert main(["embed", "--dissim", "bad.csv"]) == EXIT_INVALID


def test_outliers(trained, capsys):
    assert main(["outliers", "--model", "m/model.json", "--lof-k", "5",
                 "--lof-threshold", "1.5"]) == EXIT_OK
    rep = OutlierReport.from_json(trained / "m" / "outliers.json")
    assert rep.lof_threshold == 1.5
    assert "f1:" in capsys.readouterr().out


def test_eval(workdir):
    assert main(["eval", "--data", "d.tsv", "--measures", "DTW,ED", "--trees", "6",
                 "--out", "tables/"]) == EXIT_OK
    t1 = (workdir / "tables" / "kmeans_table.csv").read_text().splitlines()
    assert [r.split(",")[0] for r in t1] == ["method", "DGAP", "DTW", "ED"]


def test_eval_config_file(workdir):
    (workdir / "c.json").write_text(json.dumps({"n_trees": 4, "baselines": ["ED"]}))
    assert main(["eval", "--data", "d.tsv", "--config", "c.json", "--out", "t"]) == EXIT_OK
    cfg = json.loads((workdir / "t" / "config.json").read_text())
    assert cfg["n_trees"] == 4 and cfg["baselines"] == ["ED"]
    (workdir / "bad.json").write_text(json.dumps({"trees": 4}))
    assert main(["eval", "--data", "d.tsv", "--config", "bad.json", "--out", "u"]) == EXIT_INVALID


@pytest.mark.parametrize("argv", [
    ["train", "--data", "missing.tsv", "--out", "x"],
    ["train", "--data", "d.tsv", "--trees", "0", "--out", "x"],
    ["train", "--data", "d.tsv", "--measures", "DTW,NOPE", "--out", "x"],
    ["prox", "--model", "missing.json"],
    ["outliers", "--model", "d.tsv"],
    ["eval", "--data", "d.tsv", "--lof-sweep", "a,b"],
    ["train"],
    ["frobnicate"],
])
def test_validation_exit_code(workdir, argv):
    assert main(argv) == EXIT_INVALID


def test_runtime_exit_code(trained, monkeypatch):
    import pfgap.proximity as prox

    def boom(*a, **k):
        raise RuntimeError("disk on fire")

    monkeypatch.setattr(prox, "gap_proximities", boom)
    assert main(["prox", "--model", "m/model.json"]) == EXIT_FAILED


def test_input_file_untouched(trained):
    before = (trained / "d.tsv").read_bytes()
    main(["eval", "--data", "d.tsv", "--measures", "ED", "--trees", "4", "--out", "t"])
    assert (trained / "d.tsv").read_bytes() == before
    assert len(load_tsv(trained / "d.tsv")) == 16


def test_console_script(workdir):
    r = subprocess.run([sys.executable, "-m", "pfgap.cli", "synth", "--per-class", "2",
                        "--length", "4"], capture_output=True, text=True)
    assert r.returncode == 0 and len(r.stdout.splitlines()) == 4
