import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def stable_matrix(rng, n, margin=0.1):
    a = rng.normal(size=(n, n))
    shift = max(0.0, -np.min(np.linalg.eigvals(a).real)) + margin
    return a + shift * np.eye(n)


def spd_matrix(rng, n, floor=0.1):
    b = rng.normal(size=(n, n))
    return 0.5 * b @ b.T + floor * np.eye(n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
