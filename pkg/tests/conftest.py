import numpy as np
import pytest
from hypothesis import settings

from privboost.measures import bregman_project_dense
from privboost.rng import stream

settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile("ci")


def random_projectable_measure(rng: np.random.Generator, n: int, kappa: float) -> np.ndarray:
    """A random positive measure with mass at most kappa * n."""
    raw = rng.uniform(0.01, 1.0, n)
    mass = rng.uniform(0.2, 1.0) * kappa * n
    return np.minimum(1.0, raw * mass / raw.sum())


def random_smooth_distribution(rng: np.random.Generator, n: int, kappa: float) -> np.ndarray:
    """A random distribution with max entry at most 1/(kappa n)."""
    measure = bregman_project_dense(random_projectable_measure(rng, n, kappa), kappa)
    return measure / measure.sum()


@pytest.fixture
def rng():
    return stream(20240)
