import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("ci", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

# the displayed 3x3 table and move from the worked independence example
EXAMPLE_TABLE = [[2, 3, 4], [0, 3, 4], [0, 0, 1]]
EXAMPLE_MOVE = [[1, 0, -1], [0, 0, 0], [-1, 0, 1]]


def flat(rows):
    return [x for r in rows for x in r]


@pytest.fixture
def example_table():
    return flat(EXAMPLE_TABLE)


@pytest.fixture
def example_move():
    return flat(EXAMPLE_MOVE)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
