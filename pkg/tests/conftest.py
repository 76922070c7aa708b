import os

# Console-only logging for test runs; must precede project imports
os.environ.setdefault("FDF_LOG_TO_FILE", "0")

import numpy as np
import pytest

from fts.sample import FunctionalSample, Grid


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False,
        help="run the Monte Carlo acceptance checks",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="Monte Carlo check; use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def grid():
    return Grid.uniform(101)


@pytest.fixture
def sin_curve(grid):
    return np.sin(2 * np.pi * grid.points)


@pytest.fixture
def cos_curve(grid):
    return np.cos(2 * np.pi * grid.points)


@pytest.fixture
def random_sample(grid):
    rng = np.random.default_rng(2024)
    return FunctionalSample(grid=grid, values=rng.standard_normal((60, grid.m)).cumsum(axis=1) / 10)
