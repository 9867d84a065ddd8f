import csv
import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest
from click.testing import CliRunner

from hrvload.classifiers import load_model, predict
from hrvload.cli import main
from hrvload.dataset import ModelSpec, Scaler, encode, load_sessions
from hrvload.evaluation import accuracy
from hrvload.hrv import write_rr_file
from hrvload.reporting import report_schema


def invoke(args, ok=True):
    result = CliRunner().invoke(main, [str(a) for a in args], catch_exceptions=False)
    if ok:
        assert result.exit_code == 0, result.output
    return result


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    out = d / "s.csv"
    invoke(["--seed", 7, "synth", "--n", 150, "--out", out])
    return out


class TestSynth:
    def test_row_count_and_manifest(self, tmp_path):
        out = tmp_path / "s.csv"
        invoke(["synth", "--n", 300, "--seed", 7, "--signal", "1.0", "--out", out])
        assert len(read_csv(out)) == 300
        manifest = json.loads((tmp_path / "s.manifest.json").read_text())
        assert manifest["command"] == "synth"
        assert manifest["config"]["seed"] == 7 and manifest["config"]["n_sessions"] == 300
        assert manifest["status"] == "ok" and manifest["partial"] is False

    def test_identical_reruns(self, tmp_path):
        a = invoke(["--out-dir", tmp_path / "a", "synth", "--n", 40, "--seed", 3]).output.strip()
        b = invoke(["--out-dir", tmp_path / "b", "synth", "--n", 40, "--seed", 3]).output.strip()
        assert Path(a).name == Path(b).name
        assert Path(a).name.startswith("synth-3-")
        assert Path(a).read_bytes() == Path(b).read_bytes()

    def test_signal_out_of_range(self, tmp_path):
        r = invoke(["synth", "--signal", "1.5", "--out", tmp_path / "x.csv"], ok=False)
        assert r.exit_code == 2
        assert "signal" in r.output

    def test_infeasible_mix(self, tmp_path):
        r = invoke(["synth", "--n", 20, "--class-mix", "0.5,0.46,0.04", "--out", tmp_path / "x.csv"], ok=False)
        assert r.exit_code != 0

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"n_sessions": 25, "signal_strength": 0.5}))
        out = tmp_path / "s.csv"
        invoke(["synth", "--config", cfg, "--out", out])
        assert len(read_csv(out)) == 25

    def test_env_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HRVLOAD_OUT_DIR", str(tmp_path / "env"))
        path = Path(invoke(["synth", "--n", 12]).output.strip())
        assert path.parent == tmp_path / "env" and path.exists()


class TestFeatures:
    def test_constant_file(self, tmp_path):
        f = tmp_path / "rr.txt"
        write_rr_file([800.0] * 75, f)
        out = tmp_path / "f.csv"
        invoke(["features", f, "--out", out])
        (row,) = read_csv(out)
        values = [float(row[k]) for k in list(row)[1:]]
        assert values == pytest.approx([800, 0, 0, 0, 0, 0, 1, 75, 75])

    def test_directory(self, tmp_path, rng):
        d = tmp_path / "rr"
        d.mkdir()
        for i in range(5):
            write_rr_file(rng.integers(600, 1000, 70).astype(float), d / f"{i}.txt")
        out = tmp_path / "f.csv"
        invoke(["features", d, "--out", out])
        assert len(read_csv(out)) == 5

    def test_bad_file_partial(self, tmp_path):
        d = tmp_path / "rr"
        d.mkdir()
        write_rr_file([800.0, 810.0, 790.0], d / "good.txt")
        (d / "bad.txt").write_text("800\n-12\n800\n")
        out = tmp_path / "f.csv"
        r = invoke(["features", d, "--out", out], ok=False)
        assert r.exit_code == 1
        assert "bad.txt:2" in r.output
        rows = read_csv(out)
        assert len(rows) == 1 and rows[0]["file"].endswith("good.txt")
        manifest = json.loads((tmp_path / "f.manifest.json").read_text())
        assert manifest["status"] == "partial" and manifest["partial"] is True
        assert any("bad.txt" in e for e in manifest["errors"])

    def test_input_unchanged(self, tmp_path):
        f = tmp_path / "rr.txt"
        write_rr_file([800.0, 820.0, 790.0], f)
        before = f.read_bytes()
        invoke(["features", f, "--out", tmp_path / "o.csv"])
        assert f.read_bytes() == before


class TestTrainPredict:
    def test_accuracy_matches_library(self, tmp_path, dataset):
        model_path = tmp_path / "m.model.json"
        invoke(["--seed", 1, "train", "--data", dataset, "--method", "rf", "--param", "n_trees=20",
                "--out", model_path])
        assert (tmp_path / "m.scaler.json").exists()
        manifest = json.loads((tmp_path / "m.manifest.json").read_text())
        assert manifest["seeds"]["split"] == 1
        assert set(manifest["scaler"]) == set(ModelSpec.parse("post_full").columns)

        r = invoke(["predict", "--model", model_path, "--data", dataset, "--out", tmp_path / "p.csv"])
        printed = float(r.output.strip().split(",")[1])

        model = load_model(model_path)
        scaler = Scaler.load(tmp_path / "m.scaler.json")
        m = scaler.transform(encode(load_sessions(dataset), ModelSpec.parse("post_full")))
        assert printed == accuracy(predict(model, m), m.y)

    def test_json_format(self, tmp_path, dataset):
        model_path = tmp_path / "m.model.json"
        invoke(["train", "--data", dataset, "--method", "gnb", "--model", "post_short", "--no-activity",
                "--out", model_path])
        r = invoke(["--format", "json", "predict", "--model", model_path, "--data", dataset,
                    "--out", tmp_path / "p.csv"])
        doc = json.loads(r.stdout)
        assert 0 <= doc["accuracy"] <= 1 and doc["n"] == 150

    def test_identical_model_files(self, tmp_path, dataset):
        for name in ("a", "b"):
            invoke(["train", "--data", dataset, "--method", "rf", "--seed", 1, "--out", tmp_path / f"{name}.model.json"])
        assert (tmp_path / "a.model.json").read_bytes() == (tmp_path / "b.model.json").read_bytes()

    def test_missing_column(self, tmp_path, dataset):
        rows = dataset.read_text().splitlines()
        header = rows[0].split(",")
        idx = header.index("rmssd")
        broken = [",".join(v for i, v in enumerate(r.split(",")) if i != idx) for r in rows]
        bad = tmp_path / "bad.csv"
        bad.write_text("\n".join(broken) + "\n")
        r = invoke(["train", "--data", bad, "--out", tmp_path / "m.model.json"], ok=False)
        assert r.exit_code == 1
        assert "rmssd" in r.output

    def test_bad_hyperparameter(self, tmp_path, dataset):
        r = invoke(["train", "--data", dataset, "--method", "knn", "--param", "k=0",
                    "--out", tmp_path / "m.model.json"], ok=False)
        assert r.exit_code == 2


class TestGrid:
    def test_compare_default_seven_rows(self, tmp_path, dataset):
        r = invoke(["--out-dir", tmp_path, "compare", "--data", dataset, "--k", 5])
        rows = list(csv.DictReader(r.stdout.splitlines()))
        assert len(rows) == 7
        assert [row["method"] for row in rows] == ["LR", "LDA", "KN", "DT", "RF", "GNB", "SVM"]
        summaries = list(tmp_path.glob("compare-0-*-summary.csv"))
        assert len(summaries) == 1

    def test_ablate_activity_four_variants(self, tmp_path, dataset):
        r = invoke(["--out-dir", tmp_path, "--format", "json", "compare", "--data", dataset, "--k", 3,
                    "--models", "post_full,post_short", "--ablate-activity", "--methods", "rf,knn"])
        rows = json.loads(r.stdout)
        variants = {row["model"] for row in rows}
        assert variants == {"post_full+A", "post_full-A", "post_short+A", "post_short-A"}
        assert len(rows) == 8

    def test_ablate_command(self, tmp_path, dataset):
        r = invoke(["--out-dir", tmp_path, "ablate", "--data", dataset, "--k", 3, "--methods", "lda"])
        rows = list(csv.DictReader(r.stdout.splitlines()))
        assert {row["model"] for row in rows} == {"post_full+A", "post_full-A", "post_short+A", "post_short-A"}

    def test_report_validates_schema(self, tmp_path, dataset):
        invoke(["--out-dir", tmp_path, "evaluate", "--data", dataset, "--k", 3, "--method", "dt"])
        (report,) = [p for p in tmp_path.glob("evaluate-*.json") if not p.name.endswith("manifest.json")]
        doc = json.loads(report.read_text())
        jsonschema.validate(doc, report_schema())
        assert len(doc["entries"]) == 1
        assert list(tmp_path.glob("*roc.svg")) and list(tmp_path.glob("*confusion.svg"))

        r = invoke(["report", report])
        assert r.output.splitlines()[0].startswith("model,method,auc_micro")

    def test_unknown_method(self, tmp_path, dataset):
        r = invoke(["--out-dir", tmp_path, "compare", "--data", dataset, "--methods", "xgboost"], ok=False)
        assert r.exit_code == 2


class TestReplay:
    def test_replay_reproduces_outputs(self, tmp_path, dataset):
        out = tmp_path / "run"
        invoke(["--out-dir", out, "--seed", 2, "compare", "--data", dataset, "--k", 3, "--methods", "rf,lr"])
        (manifest,) = out.glob("compare-*.manifest.json")
        doc = json.loads(manifest.read_text())
        originals = {p: Path(p).read_bytes() for p in doc["outputs"]}
        for p in originals:
            Path(p).unlink()
        invoke(["replay", manifest])
        for p, data in originals.items():
            assert Path(p).read_bytes() == data

    def test_features_replay(self, tmp_path):
        f = tmp_path / "rr.txt"
        write_rr_file(np.full(70, 850.0), f)
        out = tmp_path / "feat.csv"
        invoke(["features", f, "--out", out])
        before = out.read_bytes()
        out.unlink()
        invoke(["replay", tmp_path / "feat.manifest.json"])
        assert out.read_bytes() == before
