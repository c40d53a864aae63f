"""
Tests for relevant-input discovery and the relevance report.
"""

import json

import numpy as np
import pytest

from classrbm.exceptions import ConfigError, DimensionMismatchError, InvalidLabelError
from classrbm.model import ModelParameters
from classrbm.oracle import random_params
from classrbm.relevance import (
    REPORT_COLUMNS,
    input_relevance,
    input_relevance_log_odds,
    relevance_plot_series,
    relevance_report,
    relevant_inputs,
    write_relevance_csv,
    write_relevance_json,
)
from classrbm.utils.numerics import sigmoid

pytestmark = pytest.mark.unit


class TestInputRelevance:
    """Closed-form p(x_i = 1 | other inputs off, y)."""

    def test_zero_model(self):
        assert np.all(input_relevance(ModelParameters.zeros(5, 3, 2), 1) == 0.5)

    def test_no_visible_hidden_weights(self, rng):
        params = random_params(5, 3, 2, rng).replace(W1=np.zeros((5, 3)))
        for y in (1, 2):
            assert np.allclose(input_relevance(params, y), sigmoid(params.b), atol=1e-12)

    def test_monotone_in_visible_bias(self, tiny_params):
        before = input_relevance(tiny_params, 2)
        b = np.array(tiny_params.b)
        b[1] += 0.5
        after = input_relevance(tiny_params.replace(b=b), 2)
        assert after[1] > before[1]
        assert np.array_equal(np.delete(after, 1), np.delete(before, 1))

    def test_strictly_inside_unit_interval(self, rng):
        for _ in range(50):
            probs = input_relevance(random_params(6, 4, 3, rng), 3)
            assert np.all((probs > 0.0) & (probs < 1.0))

    def test_invalid_label(self, tiny_params):
        with pytest.raises(InvalidLabelError):
            input_relevance(tiny_params, 3)


class TestSaturation:
    """Large visible biases round the probability to 1.0 but keep the log-odds ordered."""

    def test_log_odds_match_bias_without_weights(self):
        b = np.array([0.0, 40.0, 41.0])
        params = ModelParameters.zeros(3, 2, 2).replace(b=b)
        assert np.allclose(input_relevance_log_odds(params, 1), b, atol=1e-12)

    def test_probability_saturates(self):
        params = ModelParameters.zeros(3, 2, 2).replace(b=np.array([0.0, 40.0, 41.0]))
        probs = input_relevance(params, 2)
        assert probs[1] == 1.0 and probs[2] == 1.0
        odds = input_relevance_log_odds(params, 2)
        assert odds[2] > odds[1]

    def test_report_carries_log_odds(self, tmp_path):
        params = ModelParameters.zeros(3, 2, 2).replace(b=np.array([0.0, 40.0, 41.0]))
        report = relevance_report(params, labels=[1])
        rows = report.rows()
        assert [row.log_odds for row in rows] == pytest.approx([0.0, 40.0, 41.0])
        assert [row.selected for row in rows] == [False, True, True]
        payload = json.loads(write_relevance_json(report, tmp_path / "r.json").read_text())
        assert payload["rows"][2]["log_odds"] == pytest.approx(41.0)


class TestRelevantInputs:
    def test_strict_threshold(self):
        assert relevant_inputs([0.5, 0.5, 0.5], 0.5) == []

    def test_one_based_selection(self):
        assert relevant_inputs([0.9, 0.1, 0.6], 0.5) == [1, 3]

    @pytest.mark.parametrize("threshold", [0.0, 1.0, 1.2])
    def test_invalid_threshold(self, threshold):
        with pytest.raises(ConfigError):
            relevant_inputs([0.2], threshold)


class TestRelevanceReport:
    """Named, thresholded report rows and their serialized forms."""

    def test_zero_model_selects_nothing(self):
        report = relevance_report(ModelParameters.zeros(4, 2, 2))
        assert report.selected == {1: [], 2: []}
        assert len(report.rows()) == 8

    def test_constructed_fixture_selects_inputs(self, bundled_schema):
        b = np.zeros(55)
        b[10:14] = 5.0
        params = ModelParameters.zeros(55, 4, 2).replace(b=b)
        report = relevance_report(params, bundled_schema.input_names())
        assert report.selected[2] == [11, 12, 13, 14]
        names = {row.input_number: row.input_name for row in report.rows() if row.label == 2}
        assert names[11].startswith("histological type of the tumor")

    def test_selected_agrees_with_rows(self, rng):
        report = relevance_report(random_params(6, 3, 2, rng), threshold=0.4)
        for row in report.rows():
            assert row.selected == (row.probability > 0.4)

    def test_single_class(self, tiny_params):
        report = relevance_report(tiny_params, labels=[2])
        assert list(report.probabilities) == [2]

    def test_name_count_checked(self, tiny_params):
        with pytest.raises(DimensionMismatchError):
            relevance_report(tiny_params, ["a", "b"])

    def test_csv_and_json(self, tiny_params, tmp_path):
        report = relevance_report(tiny_params)
        csv_lines = write_relevance_csv(report, tmp_path / "r.csv").read_text().splitlines()
        assert csv_lines[0] == ",".join(REPORT_COLUMNS)
        assert len(csv_lines) == 1 + 2 * 4
        payload = json.loads(write_relevance_json(report, tmp_path / "r.json").read_text())
        assert payload["threshold"] == 0.5
        assert len(payload["rows"]) == 8
        assert payload["rows"][0]["input_name"] == "x1"

    def test_plot_series(self, tiny_params):
        report = relevance_report(tiny_params)
        series = relevance_plot_series(report, 1)
        assert [index for index, _ in series] == [1, 2, 3, 4]
        assert np.allclose([p for _, p in series], input_relevance(tiny_params, 1))
