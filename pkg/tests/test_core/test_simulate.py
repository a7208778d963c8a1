"""Tests for synthetic season generation."""

import numpy as np
import pytest

from blockleague.exceptions import ConfigurationError
from blockleague.league import points_table
from blockleague.simulate import (
    BASE_OUTCOMES,
    SimulationConfig,
    separated_interactions,
    simulate_season,
)


class TestSeparatedInteractions:
    def test_rows_are_distributions(self):
        p = separated_interactions(3, 0.4)

        assert p.shape == (3, 3, 3)
        assert p.sum(axis=-1) == pytest.approx(np.ones((3, 3)))

    def test_zero_separation_is_base(self):
        p = separated_interactions(2, 0.0)

        assert p[0, 1].tolist() == pytest.approx(list(BASE_OUTCOMES))
        assert p[1, 0].tolist() == pytest.approx(list(BASE_OUTCOMES))

    def test_full_separation(self):
        p = separated_interactions(2, 1.0)

        assert p[0, 1].tolist() == pytest.approx([1.0, 0.0, 0.0])
        assert p[1, 0].tolist() == pytest.approx([0.0, 0.0, 1.0])
        assert p[0, 0].tolist() == pytest.approx(list(BASE_OUTCOMES))

    @pytest.mark.parametrize('separation', [-0.1, 1.5])
    def test_out_of_range(self, separation):
        with pytest.raises(ConfigurationError):
            separated_interactions(2, separation)


class TestSimulationConfig:
    @pytest.mark.parametrize(
        'kwargs',
        [
            {'block_sizes': ()},
            {'block_sizes': (1,)},
            {'block_sizes': (2, 0)},
            {'block_sizes': (2, 2), 'separation': 0.5, 'interactions': np.ones((2, 2, 3)) / 3},
            {'block_sizes': (2, 2), 'interactions': np.ones((3, 3, 3)) / 3},
            {'block_sizes': (2, 2), 'interactions': np.ones((2, 2, 3))},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            SimulationConfig(**kwargs)


class TestSimulateSeason:
    def test_truth_and_names(self):
        season = simulate_season(SimulationConfig(block_sizes=(2, 3, 5), rng_seed=4))

        assert season.results.teams[0] == 'T01'
        assert season.results.teams[-1] == 'T10'
        assert season.truth.sizes.tolist() == [2, 3, 5]
        truth = season.truth_dict()
        assert truth['k'] == 3
        assert truth['z']['T10'] == 3

    def test_reproducible(self):
        cfg = SimulationConfig(block_sizes=(3, 3), separation=0.5, rng_seed=8)

        assert simulate_season(cfg).results == simulate_season(cfg).results

    def test_seed_matters(self):
        a = simulate_season(SimulationConfig(block_sizes=(5, 5), rng_seed=1))
        b = simulate_season(SimulationConfig(block_sizes=(5, 5), rng_seed=2))

        assert a.results != b.results

    def test_deterministic_interactions(self):
        p = np.zeros((2, 2, 3))
        p[:, :, 1] = 1.0
        p[0, 1] = (1.0, 0.0, 0.0)
        p[1, 0] = (0.0, 0.0, 1.0)
        cfg = SimulationConfig(block_sizes=(2, 2), interactions=p)

        season = simulate_season(cfg)

        # block 1 wins its four games against block 2 and draws twice within its block
        assert points_table(season.results).points.tolist() == [14, 14, 2, 2]

    def test_full_separation_orders_points(self):
        cfg = SimulationConfig(block_sizes=(3, 3), separation=1.0, rng_seed=5)

        points = points_table(simulate_season(cfg).results).points

        assert points[:3].min() > points[3:].max()
