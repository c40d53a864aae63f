"""
Tests for the log-domain numerical helpers.
"""

import numpy as np
import pytest

from classrbm.utils.numerics import binary_configurations, log_normalize, sigmoid, softplus, stable_softmax

pytestmark = pytest.mark.unit


class TestSoftplus:
    def test_matches_naive_form_in_safe_range(self):
        t = np.linspace(-20, 20, 81)
        assert np.allclose(softplus(t), np.log1p(np.exp(t)), rtol=1e-12, atol=1e-300)

    def test_extremes(self):
        assert softplus(1000.0) == 1000.0
        assert softplus(-1000.0) == 0.0
        assert softplus(0.0) == pytest.approx(np.log(2.0))

    def test_no_overflow_warning(self):
        with np.errstate(over="raise"):
            softplus(np.array([-800.0, 800.0]))


class TestSoftmax:
    def test_uniform(self):
        assert np.allclose(stable_softmax(np.zeros(4)), 0.25)

    def test_large_logits(self):
        probs = stable_softmax(np.array([1000.0, 1000.0 + np.log(3.0)]))
        assert np.allclose(probs, [0.25, 0.75])

    def test_log_normalize_rows(self):
        logits = np.array([[0.0, np.log(3.0)], [5.0, 5.0]])
        assert np.allclose(np.exp(log_normalize(logits)).sum(axis=1), 1.0)

    def test_sigmoid_saturation(self):
        assert sigmoid(-800.0) == 0.0
        assert sigmoid(800.0) == 1.0


class TestBinaryConfigurations:
    def test_counting_order(self):
        configs = binary_configurations(3)
        assert configs.shape == (8, 3)
        assert configs[5].tolist() == [1.0, 0.0, 1.0]
        assert len({tuple(row) for row in configs}) == 8

    def test_empty_width(self):
        assert binary_configurations(0).shape == (1, 0)
