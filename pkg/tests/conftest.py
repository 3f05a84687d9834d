import numpy as np
import pytest

from mimo_switch.link_adapt import RateTable, allocations
from mimo_switch.models import AppConfig, RunConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

@pytest.fixture
def small_config(tmp_path):
    """Ideal-mode config small enough for unit tests."""
    return AppConfig(run=RunConfig(n_trials=12, seed=7, out_dir=tmp_path / "out"))

@pytest.fixture
def practical_config(small_config):
    run = small_config.run.model_copy(update={"mode": "practical", "n_trials": 6})
    return small_config.model_copy(update={"run": run})


def random_rate_table(rng: np.random.Generator, n_antennas: int = 4, high: int = 600) -> RateTable:
    """Rate table with random counts that respect the silent-link rule."""
    counts = {}
    for m1, m2 in allocations(n_antennas):
        n1 = int(rng.integers(1, high)) if m1 else 0
        n2 = int(rng.integers(1, high)) if m2 else 0
        counts[(m1, m2)] = (n1, n2)
    return RateTable.from_counts(counts, n_antennas)

@pytest.fixture
def make_rate_table():
    return random_rate_table
