"""Shared fixtures: tiny seasons with hand-checkable posteriors."""

from pathlib import Path

import numpy as np
import pytest

from blockleague.league import ResultsMatrix, read_season
from blockleague.simulate import SimulationConfig, simulate_season

DATA_DIR = Path(__file__).resolve().parent.parent / 'data'


@pytest.fixture
def two_teams():
    """A beats B at home and away: y_12 = 1, y_21 = 3."""
    return ResultsMatrix(teams=('A', 'B'), outcomes=np.array([[0, 1], [3, 0]]))


@pytest.fixture
def three_teams():
    """A wins every game, B and C draw at B and C wins at home against B."""
    return ResultsMatrix(
        teams=('A', 'B', 'C'),
        outcomes=np.array([[0, 1, 1], [3, 0, 2], [3, 1, 0]]),
    )


@pytest.fixture
def all_draws():
    n = 4
    outcomes = np.full((n, n), 2)
    return ResultsMatrix(teams=tuple('ABCD'), outcomes=outcomes)


@pytest.fixture
def planted_six():
    """Six teams in two well separated blocks of three."""
    return simulate_season(
        SimulationConfig(block_sizes=(3, 3), separation=0.9, rng_seed=11)
    ).results


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(2024)))


@pytest.fixture
def season_file(tmp_path, three_teams):
    path = tmp_path / 'tiny.csv'
    path.write_text(three_teams.to_outcome_csv(), encoding='utf-8')
    return path


@pytest.fixture
def season_2122():
    """The 2021/22 season, if the data directory holds it."""
    path = DATA_DIR / '2122.csv'
    if not path.is_file():
        pytest.skip(f'{path} not available')
    return read_season(path)
