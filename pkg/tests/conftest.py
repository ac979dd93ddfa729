"""
Shared fixtures for the indisup test suite.
"""

import os
import sys

import numpy as np
import pytest

# Ensure the project root is on the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from indisup.app.services.data import generate_synthetic_field  # noqa: E402
from indisup.app.services.training import TrainConfig  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_field():
    """Six short wells; enough for splits, batching and a few training steps."""
    return generate_synthetic_field(seed=3, n_wells=6, samples_per_well=240)


@pytest.fixture(scope="session")
def desk_field():
    """The desk-scale field used by the statistical experiments."""
    return generate_synthetic_field(seed=0, n_wells=12, samples_per_well=2000)


@pytest.fixture
def tiny_config():
    """Runs in well under a second on small_field."""
    return TrainConfig(batch_size=4, seq_len=20, hidden_size=4, iterations=5, seed=0, log_every=5)


@pytest.fixture(scope="session")
def desk_config():
    """Desk-scale training: batch 32, seq 50, 500 iterations."""
    return TrainConfig(batch_size=32, seq_len=50, hidden_size=16, iterations=500, learning_rate=5e-3, seed=0)
