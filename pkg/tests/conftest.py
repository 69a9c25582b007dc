import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qcrlab import default_config

settings.register_profile(
    "qcrlab",
    deadline=None,
    max_examples=int(os.environ.get("QCRLAB_HYPOTHESIS_EXAMPLES", "25")),
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("qcrlab")


@pytest.fixture(scope="session")
def config():
    return default_config()


@pytest.fixture(scope="session")
def junction(config):
    """Bundled junction at the 60 mK quasiparticle temperature."""
    return config.junction()


@pytest.fixture(scope="session")
def resonator(config):
    return config.resonator()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
