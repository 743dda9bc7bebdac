import numpy as np
import pytest
from hypothesis import settings

from convexj.shapes import disc, random_corpus
from convexj.spectral import lambda1_fem

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(scope="session")
def corpus():
    return random_corpus(200, seed=0)


@pytest.fixture(scope="session")
def small_corpus(corpus):
    return corpus[:20]


@pytest.fixture(scope="session")
def disc256():
    return disc(1.0)


@pytest.fixture(scope="session")
def disc_fine(disc256):
    """Refinement-6 solve of the 256-gon, shared across modules (~15 s)."""
    return lambda1_fem(disc256, 6)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
