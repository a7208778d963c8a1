"""Tests for strongest-block identification and posterior summaries."""

import math

import numpy as np
import pytest

from blockleague.exceptions import InvalidInput
from blockleague.model import BlockState, PriorConfig, compute_stats
from blockleague.posterior import (
    PosteriorSummary,
    identify_strongest,
    interaction_posterior,
    map_allocation,
    ordered_results_grid,
    orient_trace,
    roster_table,
    strength_order,
    summarize,
    top_block_size_series,
)
from blockleague.relabel import relabel_trace
from blockleague.sampler import SamplerConfig, Trace, run_sampler


def _trace(rows, ks, teams):
    rows = np.asarray(rows)
    return Trace(
        teams=teams,
        allocations=rows,
        k=np.asarray(ks),
        iterations=np.arange(1, len(ks) + 1),
        chain=np.zeros(len(ks)),
    )


class TestStrongestBlock:
    def test_winner_block_first(self, three_teams):
        state = BlockState.from_labels([2, 1, 1])
        stats = compute_stats(three_teams, state)

        assert strength_order(stats) == [1, 0]
        assert identify_strongest(state, stats).apply(state.z).tolist() == [0, 1, 1]

    def test_empty_blocks_last(self, three_teams):
        state = BlockState.from_labels([3, 3, 3], k=4)
        stats = compute_stats(three_teams, state)

        assert strength_order(stats) == [2, 0, 1, 3]

    def test_inter_block_points_share(self, three_teams):
        # A wins all four of its games; C takes 1.5 of 4 points, B takes 0.5
        state = BlockState.from_labels([1, 2, 3])
        stats = compute_stats(three_teams, state)

        order = strength_order(stats)

        assert order == [0, 2, 1]

    def test_single_block_identity(self, three_teams):
        state = BlockState.single_block(3)

        assert identify_strongest(state, compute_stats(three_teams, state)).is_identity

    def test_ties_prefer_within_block_home_wins(self, all_draws):
        state = BlockState.from_labels([1, 1, 2, 2])

        assert strength_order(compute_stats(all_draws, state)) == [0, 1]


class TestOrientTrace:
    def test_strongest_label_first(self, two_teams):
        trace = _trace([[1, 0], [0, 1], [0, 0]], [2, 2, 1], two_teams.teams)

        oriented = orient_trace(relabel_trace(trace), two_teams)

        assert oriented.allocations.tolist() == [[0, 1], [0, 1], [0, 0]]
        for s in range(3):
            composed = oriented.permutations[s].apply(trace.allocations[s])
            assert composed.tolist() == oriented.allocations[s].tolist()

    def test_team_mismatch(self, two_teams, three_teams):
        trace = _trace([[0, 0, 0]], [1], three_teams.teams)

        with pytest.raises(InvalidInput):
            orient_trace(relabel_trace(trace), two_teams)


class TestSummarize:
    @pytest.fixture
    def summary(self):
        trace = _trace(
            [[0, 0, 0], [0, 1, 1], [0, 1, 1], [0, 0, 1]], [1, 2, 2, 2], ('A', 'B', 'C')
        )
        return summarize(trace, k_max=3)

    def test_k_probs(self, summary):
        assert summary.k_probs.tolist() == pytest.approx([0.25, 0.75, 0.0])
        assert summary.pi_k1 == pytest.approx(0.25)
        assert sorted(summary.alloc_probs_given_k) == [1, 2]

    def test_marginal_averages_over_k(self, summary):
        assert summary.top_block_marginal.tolist() == pytest.approx([1.0, 0.5, 0.25])
        assert summary.top_block_roster == ('A',)
        assert summary.top_block_size == 1

    def test_marginal_frame(self, summary):
        frame = summary.marginal_frame()

        assert frame['team'].tolist() == ['A', 'B', 'C']
        assert frame['marginal'].tolist() == pytest.approx([1.0, 0.5, 0.25])

    def test_allocation_rows_sum_to_one(self, summary):
        for probs in summary.alloc_probs_given_k.values():
            assert probs.sum(axis=1) == pytest.approx(np.ones(3))

    def test_allocation_table(self, summary):
        table = summary.allocation_table(2)

        assert table.columns.tolist() == ['team', 'block_1', 'block_2']
        assert table['team'].tolist() == ['A', 'B', 'C']
        assert table['block_1'].tolist() == pytest.approx([100.0, 33.33, 0.0])
        with pytest.raises(InvalidInput):
            summary.allocation_table(3)

    def test_k_table(self, summary):
        table = summary.k_table()

        assert table['percent'].tolist() == [25.0, 75.0, 0.0]

    def test_dict_round_trip(self, summary):
        restored = PosteriorSummary.from_dict(summary.to_dict())

        assert restored.teams == summary.teams
        assert np.allclose(restored.k_probs, summary.k_probs)
        assert np.allclose(restored.alloc_probs_given_k[2], summary.alloc_probs_given_k[2])
        assert restored.top_block_roster == summary.top_block_roster

    def test_from_dict_missing_key(self):
        with pytest.raises(InvalidInput):
            PosteriorSummary.from_dict({'teams': ['A']})

    def test_threshold_is_strict(self):
        trace = _trace([[0, 0], [0, 1]], [2, 2], ('A', 'B'))

        assert summarize(trace, threshold=0.5).top_block_roster == ('A',)

    def test_k_max_below_sampled_k(self):
        trace = _trace([[0, 1]], [2], ('A', 'B'))

        with pytest.raises(InvalidInput):
            summarize(trace, k_max=1)

    def test_sampled_two_team_posterior(self, two_teams):
        cfg = SamplerConfig(iterations=20_000, burn_in=2_000, rng_seed=3)
        trace = run_sampler(two_teams, PriorConfig(k_max=2), cfg)

        summary = summarize(orient_trace(relabel_trace(trace), two_teams), k_max=2)

        assert summary.pi_k1 == pytest.approx(9 / 14, abs=0.03)
        assert summary.top_block_marginal[0] == pytest.approx(1.0)
        assert summary.top_block_marginal[1] == pytest.approx(6 / 7, abs=0.03)


class TestInteractionPosterior:
    def test_dirichlet_moments(self, two_teams):
        post = interaction_posterior(two_teams, np.array([0, 1]), 2)

        assert post.alpha[0, 1].tolist() == [2.0, 1.0, 1.0]
        assert post.mean[0, 1].tolist() == pytest.approx([0.5, 0.25, 0.25])
        assert post.sd[0, 1, 0] == pytest.approx(math.sqrt(0.05))
        assert (post.lower < post.mean).all()
        assert (post.mean < post.upper).all()

    def test_empty_pair_is_prior(self, two_teams):
        post = interaction_posterior(two_teams, np.array([0, 1]), 2, beta=(2.0, 1.0, 1.0))

        assert post.mean[0, 0].tolist() == pytest.approx([0.5, 0.25, 0.25])

    def test_frame(self, two_teams):
        frame = interaction_posterior(two_teams, np.array([0, 0]), 1).to_frame()

        assert frame['outcome'].tolist() == ['H', 'D', 'A']
        assert frame['alpha'].tolist() == [2.0, 1.0, 2.0]

    def test_matches_dirichlet_draws(self, planted_six):
        post = interaction_posterior(planted_six, np.array([0, 0, 0, 1, 1, 1]), 2)
        rng = np.random.default_rng(11)

        for kh in range(2):
            for ka in range(2):
                draws = rng.dirichlet(post.alpha[kh, ka], size=40_000)
                assert draws.mean(axis=0) == pytest.approx(post.mean[kh, ka], abs=0.005)
                assert draws.std(axis=0) == pytest.approx(post.sd[kh, ka], abs=0.005)
                inside = (draws > post.lower[kh, ka]) & (draws < post.upper[kh, ka])
                assert inside.mean(axis=0) == pytest.approx([0.95] * 3, abs=0.01)

    def test_dict(self, two_teams):
        doc = interaction_posterior(two_teams, np.array([0, 1]), 2).to_dict()

        assert doc['k'] == 2
        assert doc['alpha'][0][1] == [2.0, 1.0, 1.0]
        assert set(doc) == {'k', 'alpha', 'mean', 'sd', 'q025', 'q975'}


class TestMapAllocation:
    def test_most_frequent(self):
        trace = _trace([[0, 1], [1, 0], [0, 1], [0, 0]], [2, 2, 2, 1], ('A', 'B'))

        assert map_allocation(trace, 2).z.tolist() == [0, 1]
        assert map_allocation(trace, 1).z.tolist() == [0, 0]

    def test_missing_k(self):
        trace = _trace([[0, 0]], [1], ('A', 'B'))

        with pytest.raises(InvalidInput):
            map_allocation(trace, 2)


class TestSeasonTables:
    def test_roster_table_and_sizes(self):
        first = summarize(_trace([[0, 1]], [2], ('A', 'B')))
        second = summarize(_trace([[0, 0, 1]], [2], ('A', 'C', 'D')))

        sizes = top_block_size_series({'s1': first, 's2': second})
        table = roster_table({'s1': first, 's2': second})

        assert sizes.to_dict() == {'s1': 1, 's2': 2}
        assert table.index.tolist() == ['A', 'B', 'C', 'D']
        assert np.isnan(table.loc['B', 's2'])
        assert table.loc['C', 's2'] == pytest.approx(1.0)

    def test_ordered_grid(self, three_teams):
        grid = ordered_results_grid(three_teams, np.array([1, 0, 0]))

        assert grid.index.tolist() == ['C', 'B', 'A']
        assert grid['block'].tolist() == [1, 1, 2]
        assert grid.loc['C', 'C'] == '-'

    def test_ordered_grid_length(self, three_teams):
        with pytest.raises(InvalidInput):
            ordered_results_grid(three_teams, np.array([0, 1]))
