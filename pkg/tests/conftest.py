"""
Test configuration for classrbm.
"""

import numpy as np
import pytest

from classrbm.data import load_bundled_schema, split, synth_generate
from classrbm.model import ModelParameters
from classrbm.oracle import random_params


@pytest.fixture
def rng():
    """Fresh seeded generator per test."""
    return np.random.default_rng(12345)


@pytest.fixture
def tiny_params(rng):
    """Random D=4, M=3, K=2 model with N(0, 1) entries."""
    return random_params(4, 3, 2, rng)


@pytest.fixture
def zero_params():
    return ModelParameters.zeros(3, 2, 2)


@pytest.fixture(scope="session")
def bundled_schema():
    return load_bundled_schema()


@pytest.fixture(scope="session")
def synthetic_fixture():
    """Separable synthetic task: D=20, K=2, 500 train / 500 test, signal strength 0.4."""
    dataset = synth_generate(20, 2, 1000, 0.4, np.random.default_rng(2024))
    train_set, test_set = split(dataset, 0.5, seed=0)
    return dataset, train_set, test_set


@pytest.fixture
def small_dataset():
    """Tiny D=4, K=2 dataset of 20 examples for likelihood and CLI checks."""
    return synth_generate(4, 2, 20, 0.4, np.random.default_rng(99))
