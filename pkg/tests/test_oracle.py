"""
Tests for the brute-force enumeration oracle.
"""

import itertools

import numpy as np
import pytest
from hypothesis import given

from classrbm.data import Dataset
from classrbm.exceptions import DataError, EnumerationTooLargeError, InvalidInputError
from classrbm.model import ModelParameters, predict_proba
from classrbm.oracle import (
    MAX_ENUMERATED_INPUTS,
    exact_input_relevance,
    exact_joint,
    exact_log_likelihood,
    exact_loglik_gradient,
    emit_fixtures,
    load_fixtures,
    log_partition_function,
    random_params,
)
from classrbm.relevance import input_relevance
from classrbm.utils.numerics import binary_configurations
from tests.strategies import ORACLE_SETTINGS, tiny_models

pytestmark = pytest.mark.unit


def _triple_loop_log_z(params: ModelParameters) -> float:
    """log Z by literal loops over every (x, y, h), energy written out term by term."""
    terms = []
    for x in itertools.product([0.0, 1.0], repeat=params.D):
        for y in range(params.K):
            for h in itertools.product([0.0, 1.0], repeat=params.M):
                x_, h_ = np.array(x), np.array(h)
                neg_energy = (params.b @ x_ + params.c @ h_ + params.d[y]
                              + x_ @ params.W1 @ h_ + h_ @ params.W2[:, y])
                terms.append(neg_energy)
    terms = np.array(terms)
    top = terms.max()
    return float(top + np.log(np.exp(terms - top).sum()))


def _finite_difference(params: ModelParameters, X, y, name: str, step: float = 1e-5) -> np.ndarray:
    base = getattr(params, name)
    grad = np.zeros_like(base)
    for index in np.ndindex(base.shape):
        plus, minus = np.array(base), np.array(base)
        plus[index] += step
        minus[index] -= step
        f_plus = exact_log_likelihood(params.replace(**{name: plus}), list(zip(X, y)))
        f_minus = exact_log_likelihood(params.replace(**{name: minus}), list(zip(X, y)))
        grad[index] = (f_plus - f_minus) / (2 * step)
    return grad


class TestPartitionFunction:
    """log Z with hidden units summed analytically or enumerated."""

    def test_zero_model(self):
        params = ModelParameters.zeros(3, 2, 2)
        assert log_partition_function(params) == pytest.approx((3 + 2 + 1) * np.log(2.0), abs=1e-12)

    def test_matches_triple_loop(self, rng):
        params = random_params(3, 2, 2, rng)
        assert abs(log_partition_function(params) - _triple_loop_log_z(params)) <= 1e-10

    def test_analytic_hidden_sum_matches_explicit(self, rng):
        for D, M in [(2, 2), (4, 3), (6, 6)]:
            params = random_params(D, M, 2, rng)
            assert abs(log_partition_function(params, sum_hidden=True)
                       - log_partition_function(params, sum_hidden=False)) <= 1e-10

    def test_guard(self):
        with pytest.raises(EnumerationTooLargeError):
            log_partition_function(ModelParameters.zeros(MAX_ENUMERATED_INPUTS + 1, 2, 2))
        with pytest.raises(EnumerationTooLargeError):
            log_partition_function(ModelParameters.zeros(3, 2, 11))
        with pytest.raises(EnumerationTooLargeError):
            log_partition_function(ModelParameters.zeros(3, 17, 2), sum_hidden=False)


class TestExactJoint:
    """Normalization and cross-checks of p(x, y)."""

    def test_sums_to_one(self, rng):
        for _ in range(10):
            params = random_params(4, 3, 3, rng)
            total = sum(exact_joint(params, x, y) for x in binary_configurations(4) for y in (1, 2, 3))
            assert abs(total - 1.0) <= 1e-10

    def test_zero_model_uniform(self):
        params = ModelParameters.zeros(2, 2, 2)
        assert exact_joint(params, [1, 0], 2) == pytest.approx(1 / 8, abs=1e-12)

    def test_ratios_match_predict_proba(self, tiny_params):
        for x in binary_configurations(4):
            joint = np.array([exact_joint(tiny_params, x, y) for y in (1, 2)])
            assert np.allclose(joint / joint.sum(), predict_proba(tiny_params, x), atol=1e-9)

    def test_single_input_only(self, tiny_params):
        with pytest.raises(InvalidInputError):
            exact_joint(tiny_params, np.zeros((2, 4)), 1)


class TestLogLikelihoodGradient:
    """Exact gradient of the mean log-likelihood."""

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            params = random_params(4, 3, 2, rng)
            X = rng.integers(0, 2, (5, 4)).astype(float)
            y = rng.integers(1, 3, 5)
            gradient = exact_loglik_gradient(params, list(zip(X, y)))
            for name, block in gradient.blocks().items():
                numeric = _finite_difference(params, X, y, name)
                scale = max(np.linalg.norm(block), np.linalg.norm(numeric), 1e-8)
                assert np.linalg.norm(block - numeric) / scale <= 1e-5, name

    def test_duplicated_dataset_same_gradient(self, tiny_params, small_dataset):
        pairs = list(small_dataset)
        once = exact_loglik_gradient(tiny_params, pairs)
        twice = exact_loglik_gradient(tiny_params, pairs + pairs)
        for name, block in once.blocks().items():
            assert np.allclose(block, getattr(twice, name), atol=1e-12)

    def test_accepts_dataset(self, tiny_params, small_dataset):
        from_dataset = exact_loglik_gradient(tiny_params, small_dataset)
        from_pairs = exact_loglik_gradient(tiny_params, list(small_dataset))
        assert np.allclose(from_dataset.W1, from_pairs.W1)
        assert from_dataset.is_finite()

    def test_zero_model_balanced_labels_has_no_label_bias_gradient(self):
        X = np.array([[1, 0, 1], [0, 1, 1], [1, 1, 0], [0, 0, 1]], dtype=float)
        dataset = Dataset(X=X, y=[1, 2, 1, 2], n_classes=2)
        gradient = exact_loglik_gradient(ModelParameters.zeros(3, 2, 2), dataset)
        assert np.allclose(gradient.d, 0.0, atol=1e-12)
        assert np.allclose(gradient.W2, 0.0, atol=1e-12)

    def test_empty_dataset(self):
        empty = Dataset(X=np.zeros((0, 3)), y=np.zeros(0, dtype=int), n_classes=2)
        with pytest.raises(DataError, match="empty"):
            exact_loglik_gradient(ModelParameters.zeros(3, 2, 2), empty)
        with pytest.raises(DataError, match="empty"):
            exact_loglik_gradient(ModelParameters.zeros(3, 2, 2), [])


class TestExactRelevance:
    """Relevance computed from joint ratios."""

    def test_zero_model(self):
        params = ModelParameters.zeros(3, 2, 2)
        assert exact_input_relevance(params, 2, 1) == pytest.approx(0.5, abs=1e-12)

    def test_saturation(self):
        params = ModelParameters.zeros(3, 2, 2).replace(b=np.array([30.0, 0.0, 0.0]))
        assert exact_input_relevance(params, 1, 2) >= 1 - 1e-9

    def test_matches_closed_form(self, rng):
        params = random_params(6, 4, 2, rng)
        for y in (1, 2):
            oracle = [exact_input_relevance(params, i, y) for i in range(1, 7)]
            assert np.allclose(input_relevance(params, y), oracle, atol=1e-9)

    @ORACLE_SETTINGS
    @given(tiny_models())
    def test_closed_form_on_population(self, params):
        for y in range(1, params.K + 1):
            oracle = [exact_input_relevance(params, i, y) for i in range(1, params.D + 1)]
            assert np.max(np.abs(input_relevance(params, y) - oracle)) <= 1e-9

    def test_input_number_range(self, tiny_params):
        with pytest.raises(InvalidInputError):
            exact_input_relevance(tiny_params, 0, 1)
        with pytest.raises(InvalidInputError):
            exact_input_relevance(tiny_params, 5, 1)


class TestFixtures:
    """Emitted oracle fixtures reload and replay."""

    def test_emit_and_replay(self, tmp_path):
        path = emit_fixtures(tmp_path / "fixtures.json", n_models=6, seed=4)
        cases = load_fixtures(path)
        assert len(cases) == 6
        for case in cases:
            params = case["model"]
            assert np.allclose(predict_proba(params, case["x"]), case["expected"]["label_posterior"], atol=1e-9)
            assert np.allclose(input_relevance(params, case["y"]), case["expected"]["relevance"], atol=1e-9)

    def test_emission_is_reproducible(self, tmp_path):
        first = emit_fixtures(tmp_path / "a.json", n_models=3, seed=1)
        second = emit_fixtures(tmp_path / "b.json", n_models=3, seed=1)
        assert first.read_bytes() == second.read_bytes()
