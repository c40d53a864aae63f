"""
End-to-end tests for the classrbm command line.
"""

import json

import numpy as np
import pytest

import classrbm.cli as cli
from classrbm.cli import EXIT_DATA, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main
from classrbm.data import export_csv
from classrbm.model import ModelParameters

pytestmark = pytest.mark.cli


@pytest.fixture(autouse=True)
def quiet_logging(monkeypatch):
    """Keep handlers installed by pytest in place."""
    monkeypatch.setattr(cli, "configure_logging", lambda *args, **kwargs: None)
    monkeypatch.setattr("classrbm.config.load_dotenv", lambda: None)


@pytest.fixture
def data_csv(small_dataset, tmp_path):
    return export_csv(small_dataset, tmp_path / "data.csv")


def _stderr_error(capsys):
    err = capsys.readouterr().err.splitlines()
    return json.loads(err[0]), err[1:]


class TestPredict:
    def test_zero_model_is_uniform(self, tmp_path, capsys):
        model = ModelParameters.zeros(3, 2, 2).save(tmp_path / "zero.json")
        data = tmp_path / "inputs.csv"
        data.write_text("x1,x2,x3\n1,0,1\n0,0,0\n")
        assert main(["predict", "--model", str(model), "--data", str(data)]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "row,label,p1,p2"
        rows = [line.split(",") for line in lines[1:]]
        assert [row[:2] for row in rows] == [["1", "1"], ["2", "1"]]
        assert np.allclose([[float(p) for p in row[2:]] for row in rows], 0.5, rtol=0, atol=1e-15)

    def test_width_mismatch_is_data_error(self, tmp_path, capsys):
        model = ModelParameters.zeros(3, 2, 2).save(tmp_path / "zero.json")
        data = tmp_path / "inputs.csv"
        data.write_text("x1,x2\n1,0\n")
        assert main(["predict", "--model", str(model), "--data", str(data)]) == EXIT_DATA
        error, _ = _stderr_error(capsys)
        assert error["error"] == "data_error"


class TestTrainAndInspect:
    def test_train_then_inspect(self, data_csv, tmp_path, capsys):
        config = tmp_path / "run.yaml"
        config.write_text("hidden_units: 3\niterations: 100\nlearning_rate: 0.05\nlog_every: 50\n")
        model = tmp_path / "model.json"
        assert main(["train", "--data", str(data_csv), "--config", str(config), "--out", str(model)]) == EXIT_OK
        assert (tmp_path / "model.log.csv").exists()
        capsys.readouterr()

        assert main(["inspect", "--model", str(model)]) == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert summary["dims"] == {"D": 4, "M": 3, "K": 2}
        assert summary["blocks"]["W1"]["shape"] == [4, 3]
        assert set(summary["blocks"]["d"]) == {"shape", "mean", "std", "min", "max", "l2_norm"}

    def test_classes_flag_sets_label_count(self, tmp_path, capsys):
        data = tmp_path / "two_seen.csv"
        data.write_text("x1,x2,label\n1,0,1\n0,1,2\n1,1,1\n")
        config = tmp_path / "run.yaml"
        config.write_text("hidden_units: 2\niterations: 20\n")
        model = tmp_path / "model.json"
        args = ["train", "--data", str(data), "--classes", "3", "--config", str(config), "--out", str(model)]
        assert main(args) == EXIT_OK
        capsys.readouterr()
        assert main(["inspect", "--model", str(model)]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["dims"]["K"] == 3

    def test_label_above_classes_is_data_error(self, tmp_path, capsys):
        data = tmp_path / "bad.csv"
        data.write_text("x1,x2,label\n1,0,1\n0,1,4\n")
        args = ["train", "--data", str(data), "--classes", "3", "--out", str(tmp_path / "m.json")]
        assert main(args) == EXIT_DATA
        error, _ = _stderr_error(capsys)
        assert error["error"] == "data_error"

    def test_same_seed_gives_identical_model_files(self, data_csv, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text("hidden_units: 2\niterations: 50\nseed: 11\n")
        for name in ("a.json", "b.json"):
            main(["train", "--data", str(data_csv), "--config", str(config), "--out", str(tmp_path / name)])
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_divergence_exits_with_numerical_failure(self, data_csv, tmp_path, capsys):
        config = tmp_path / "run.yaml"
        config.write_text("hidden_units: 3\niterations: 200\nlearning_rate: 1.0e308\n")
        code = main(["train", "--data", str(data_csv), "--config", str(config), "--out", str(tmp_path / "m.json")])
        assert code == EXIT_NUMERICAL
        error, _ = _stderr_error(capsys)
        assert error["error"] == "numerical_failure"


class TestRelevance:
    """Thresholded relevance rows on stdout and in files."""

    @pytest.fixture
    def biased_model(self, tmp_path):
        params = ModelParameters.zeros(4, 2, 2).replace(b=np.array([3.0, -3.0, 0.0, 0.1]))
        return params.save(tmp_path / "biased.json")

    def test_threshold_marks_strictly_greater(self, biased_model, capsys):
        assert main(["relevance", "--model", str(biased_model), "--class", "2"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "class,input_index,input_name,probability,log_odds,selected"
        selected = [line.split(",")[1] for line in lines[1:] if line.endswith(",1")]
        assert selected == ["1", "4"]

    def test_json_output(self, biased_model, tmp_path):
        out = tmp_path / "relevance.json"
        args = ["relevance", "--model", str(biased_model), "--format", "json", "--out", str(out)]
        assert main(args) == EXIT_OK
        payload = json.loads(out.read_text())
        assert len(payload["rows"]) == 8

    def test_invalid_threshold(self, biased_model, capsys):
        assert main(["relevance", "--model", str(biased_model), "--threshold", "1.5"]) == EXIT_USAGE
        error, _ = _stderr_error(capsys)
        assert error["error"] == "usage_error"

    def test_class_out_of_range_is_usage_error(self, biased_model, capsys):
        assert main(["relevance", "--model", str(biased_model), "--class", "5"]) == EXIT_USAGE
        error, _ = _stderr_error(capsys)
        assert error["error"] == "usage_error"
        assert "1..2" in error["message"]

    def test_plot_data_requires_class(self, biased_model, tmp_path, capsys):
        plot = tmp_path / "series.csv"
        args = ["relevance", "--model", str(biased_model), "--plot-data", str(plot)]
        assert main(args) == EXIT_USAGE
        assert not plot.exists()
        error, _ = _stderr_error(capsys)
        assert "--class" in error["message"]

    def test_plot_data_for_chosen_class(self, biased_model, tmp_path):
        plot = tmp_path / "series.csv"
        args = ["relevance", "--model", str(biased_model), "--class", "1", "--plot-data", str(plot)]
        assert main(args) == EXIT_OK
        assert len(plot.read_text().strip().splitlines()) >= 4


class TestSynthAndExperiment:
    def test_rerun_gives_identical_body(self, tmp_path):
        spec = tmp_path / "synth.yaml"
        spec.write_text("n_inputs: 5\nn_classes: 2\nn_examples: 40\nsignal_strength: 0.4\nseed: 3\n")
        data = tmp_path / "synth.csv"
        assert main(["synth", "--spec", str(spec), "--out", str(data)]) == EXIT_OK
        assert (tmp_path / "synth.generation.json").exists()

        grid = tmp_path / "grid.yaml"
        grid.write_text(
            "hidden_units: [2]\nlearning_rates: [0.1]\nrepeats: 2\niterations: 100\n"
            "schemes:\n  - kind: none\n  - kind: dropconnect\n    p: 0.5\n"
        )
        bodies = []
        for name in ("first.json", "second.json"):
            out = tmp_path / name
            args = ["experiment", "--data", str(data), "--grid", str(grid), "--out", str(out), "--workers", "1"]
            assert main(args) == EXIT_OK
            bodies.append(json.loads(out.read_text())["body"])
        assert bodies[0] == bodies[1]
        assert (tmp_path / "first.csv").exists()


class TestFixtures:
    def test_writes_requested_count(self, tmp_path):
        out = tmp_path / "fixtures.json"
        assert main(["fixtures", "--out", str(out), "--count", "3", "--seed", "5"]) == EXIT_OK
        payload = json.loads(out.read_text())
        assert payload["seed"] == 5 and len(payload["cases"]) == 3


class TestFailures:
    """Exit codes and the machine-readable error line."""

    def test_missing_data_file(self, tmp_path, capsys):
        model = ModelParameters.zeros(3, 2, 2).save(tmp_path / "zero.json")
        code = main(["predict", "--model", str(model), "--data", str(tmp_path / "absent.csv")])
        assert code == EXIT_DATA
        error, human = _stderr_error(capsys)
        assert error["error"] == "data_error" and "absent.csv" in error["message"]
        assert human

    def test_missing_model_file(self, tmp_path):
        assert main(["inspect", "--model", str(tmp_path / "absent.json")]) == EXIT_DATA

    def test_malformed_config(self, data_csv, tmp_path, capsys):
        config = tmp_path / "run.yaml"
        config.write_text("momentum: 2\n")
        code = main(["train", "--data", str(data_csv), "--config", str(config), "--out", str(tmp_path / "m.json")])
        assert code == EXIT_USAGE
        error, _ = _stderr_error(capsys)
        assert error["error"] == "usage_error" and "momentum" in error["message"]

    def test_missing_required_argument(self, capsys):
        assert main(["predict"]) == EXIT_USAGE
        error, _ = _stderr_error(capsys)
        assert error["error"] == "usage_error"

    def test_unknown_command(self, capsys):
        assert main(["serve"]) == EXIT_USAGE
        capsys.readouterr()
