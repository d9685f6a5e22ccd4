from hypothesis import HealthCheck, settings
import numpy as np
import pytest

settings.register_profile(
    'default',
    max_examples=200,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile('quick', max_examples=20, deadline=None)
settings.load_profile('default')


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)
