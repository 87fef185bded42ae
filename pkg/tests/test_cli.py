import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from sparsepce import ExperimentalDesign, InputModel, Uniform, lhs_sample
from sparsepce.cli import main
from sparsepce.exceptions import RankDeficient
from sparsepce.lar import SparsePceModel
from sparsepce.serialization import load_model, model_from_dict, model_to_dict, save_model


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def linear_design(tmp_path):
    model = InputModel.iid(Uniform(0, 1), 3)
    x = lhs_sample(model, 50, 0)
    path = tmp_path / "design.csv"
    ExperimentalDesign(x, 1 + 2 * x[:, 0] - x[:, 1] + 0.5 * x[:, 2]).to_csv(path)
    return path


@pytest.fixture
def smooth_design(tmp_path):
    model = InputModel.iid(Uniform(-1, 1), 2)
    x = lhs_sample(model, 60, 1)
    path = tmp_path / "smooth.csv"
    ExperimentalDesign(x, np.exp(x[:, 0]) * np.cos(2 * x[:, 1])).to_csv(path)
    return path


def fit(design, tmp_path, capsys, *extra, name="model.json", marginals="uniform:0:1"):
    model_path = tmp_path / name
    code, out, err = run(["fit", design, "--model", model_path, "--marginals", marginals, *extra], capsys)
    assert code == 0, err
    return json.loads(out), model_path


class TestFit:
    def test_linear_lar(self, linear_design, tmp_path, capsys):
        report, _ = fit(linear_design, tmp_path, capsys, "--method", "lar", "--p-max", "5")
        assert report["method"] == "LAR"
        assert report["best_degree"] == 1
        assert report["loo_error"] < 1e-10

    def test_hlar_matches_lar_on_additive_target(self, linear_design, tmp_path, capsys):
        fit(linear_design, tmp_path, capsys, "--method", "lar", name="lar.json")
        fit(linear_design, tmp_path, capsys, "--method", "hlar", name="hlar.json")
        a = json.loads((tmp_path / "lar.json").read_text())
        b = json.loads((tmp_path / "hlar.json").read_text())
        assert sorted(a["basis"]) == sorted(b["basis"])

    def test_model_file_schema(self, linear_design, tmp_path, capsys):
        _, model_path = fit(linear_design, tmp_path, capsys, "--seed", "17")
        data = json.loads(model_path.read_text())
        for key in ("schema_version", "input_model", "families", "basis", "coefficients", "diagnostics", "truncation", "seed"):
            assert key in data
        assert data["seed"] == 17
        assert data["families"] == ["legendre"] * 3

    def test_malformed_csv(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("x1,x2,y\n0.1,0.2,1.0\n0.3,0.4\n")
        code, _, err = run(["fit", bad, "--model", tmp_path / "m.json"], capsys)
        assert code == 2
        assert "line 3" in err

    def test_bad_marginals(self, linear_design, tmp_path, capsys):
        code, _, err = run(["fit", linear_design, "--marginals", "beta:1:2"], capsys)
        assert code == 2 and "marginal" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = run(["fit", tmp_path / "nope.csv"], capsys)
        assert code == 2

    def test_numerical_failure_exit_code(self, linear_design, tmp_path, capsys, monkeypatch):
        def boom(*args, **kwargs):
            raise RankDeficient(1, 2)

        monkeypatch.setattr("sparsepce.cli.fit_design", boom)
        code, _, err = run(["fit", linear_design, "--model", tmp_path / "m.json"], capsys)
        assert code == 3 and "numerical" in err


class TestPredict:
    def test_training_residuals(self, smooth_design, tmp_path, capsys):
        model_path = tmp_path / "m.json"
        code, out, _ = run(["fit", smooth_design, "--model", model_path, "--marginals", "uniform:-1:1", "--p-max", "6"], capsys)
        assert code == 0
        report = json.loads(out)
        code, out, _ = run(["predict", "--model", model_path, "--points", smooth_design], capsys)
        assert code == 0
        rows = list(csv.reader(out.splitlines()))
        assert rows[0] == ["y_pred"]
        pred = np.array([float(r[0]) for r in rows[1:]])
        y = ExperimentalDesign.from_csv(smooth_design).outputs
        emp = np.mean((y - pred) ** 2) / np.var(y, ddof=1)
        assert emp == pytest.approx(report["empirical_error"], rel=1e-8)

    def test_constant_model(self, tmp_path, capsys):
        model = SparsePceModel([(0, 0)], [4.25], InputModel.iid(Uniform(0, 1), 2), 0.0, 0.0)
        save_model(model, tmp_path / "c.json")
        pts = tmp_path / "p.csv"
        pts.write_text("x1,x2\n0.1,0.2\n0.5,0.9\n0.7,0.3\n")
        code, out, _ = run(["predict", "--model", tmp_path / "c.json", "--points", pts], capsys)
        assert code == 0
        assert out.splitlines()[1:] == ["4.25"] * 3

    def test_dimension_mismatch(self, linear_design, tmp_path, capsys):
        _, model_path = fit(linear_design, tmp_path, capsys)
        pts = tmp_path / "p.csv"
        pts.write_text("x1,x2\n0.1,0.2\n")
        code, _, err = run(["predict", "--model", model_path, "--points", pts], capsys)
        assert code == 2 and "columns" in err

    def test_missing_model(self, tmp_path, capsys):
        pts = tmp_path / "p.csv"
        pts.write_text("x1\n0.1\n")
        code, _, _ = run(["predict", "--model", tmp_path / "none.json", "--points", pts], capsys)
        assert code == 2


class TestSerialization:
    def test_round_trip_predictions(self, smooth_design, tmp_path, capsys):
        _, model_path = fit(smooth_design, tmp_path, capsys, marginals="uniform:-1:1")
        model = load_model(model_path)
        again = model_from_dict(json.loads(json.dumps(model_to_dict(model))))
        x = np.random.default_rng(0).uniform(-1, 1, (500, 2))
        np.testing.assert_allclose(again.predict(x), model.predict(x), rtol=0, atol=1e-14)
        np.testing.assert_array_equal(again.coefficients, model.coefficients)
        assert again.basis == model.basis

    def test_unknown_schema(self):
        with pytest.raises(ValueError, match="schema"):
            model_from_dict({"schema_version": 99})


class TestBenchmark:
    args = ["benchmark", "sobolg", "--ed-size", "60", "--p-max", "4", "--q", "0.5", "--validation-size", "2000", "--seed", "5"]

    def test_report_fields(self, capsys):
        code, out, err = run(self.args, capsys)
        assert code == 0, err
        report = json.loads(out)
        assert report["benchmark"] == "SobolG" and report["seed"] == 5
        assert 0 < report["validation_error"] < 1
        assert report["wall_time"] is None

    def test_deterministic(self, capsys):
        outs = [run(self.args + ["--method", m], capsys)[1] for m in ("hlar", "hlar", "lar", "lar")]
        assert outs[0] == outs[1] and outs[2] == outs[3]

    def test_exports(self, tmp_path, capsys):
        preds, model = tmp_path / "pred.csv", tmp_path / "model.json"
        code, _, _ = run(self.args + ["--export-predictions", preds, "--model", model], capsys)
        assert code == 0
        header = preds.read_text().splitlines()[0].split(",")
        assert header[-2:] == ["y_true", "y_pred"] and len(header) == 10
        assert load_model(model).seed == 5

    def test_unknown_benchmark(self, capsys):
        code, _, err = run(["benchmark", "nope"], capsys)
        assert code == 2 and "unknown benchmark" in err


class TestConverge:
    def test_row_count_and_determinism(self, tmp_path, capsys):
        argv = ["converge", "sobolg", "--sizes", "40", "--replications", "1", "--p-max", "3", "--q", "0.5"]
        code, first, _ = run(argv, capsys)
        assert code == 0
        rows = list(csv.reader(first.splitlines()))
        assert rows[0] == ["method", "size", "replication", "seed", "loo_error", "best_degree", "n_retained", "error"]
        assert [r[0] for r in rows[1:]] == ["LAR", "hLAR"]
        assert run(argv, capsys)[1] == first

    def test_parallel_matches_serial(self, capsys):
        argv = ["converge", "sobolg", "--sizes", "30,40", "--replications", "2", "--p-max", "3", "--q", "0.5"]
        serial = run(argv, capsys)[1]
        assert run(argv + ["--jobs", "2"], capsys)[1] == serial
        assert len(serial.splitlines()) == 1 + 2 * 2 * 2

    def test_bad_sizes(self, capsys):
        code, _, _ = run(["converge", "sobolg", "--sizes", "200,100"], capsys)
        assert code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sparsepce", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "benchmark" in proc.stdout
