"""Tests for the HHICB and relative-entropy balance indices."""

import logging
import math

import numpy as np
import pytest

from blockleague.exceptions import DegenerateSeason, InvalidInput
from blockleague.indices import (
    IndexReport,
    hhicb,
    index_report,
    index_vs_posterior,
    linear_trend,
    relative_entropy,
    reports_frame,
)
from blockleague.league import PointsTable, ResultsMatrix, points_table


class TestIndices:
    def test_balanced_league(self, all_draws):
        report = index_report('draws', all_draws)

        assert report.hhicb == pytest.approx(1.0)
        assert report.relative_entropy == pytest.approx(1.0)
        assert not report.zero_share

    @pytest.mark.parametrize('n', [2, 7, 20, 30])
    def test_uniform_shares(self, n):
        pt = PointsTable(teams=tuple(f'T{i}' for i in range(n)), points=np.full(n, 38))

        assert hhicb(pt) == pytest.approx(1.0, abs=1e-12)
        assert relative_entropy(pt) == pytest.approx(1.0, abs=1e-12)

    def test_two_team_values(self):
        r = ResultsMatrix(teams=('T1', 'T2'), outcomes=np.array([[0, 1], [2, 0]]))
        pt = points_table(r)

        expected_entropy = (0.8 * math.log(0.8) + 0.2 * math.log(0.2)) / math.log(0.5)
        assert hhicb(pt) == pytest.approx(1.36)
        assert relative_entropy(pt) == pytest.approx(expected_entropy)

    def test_zero_share_warns(self, two_teams, caplog):
        with caplog.at_level(logging.WARNING, logger='blockleague.indices'):
            report = index_report('lopsided', two_teams)

        assert report.zero_share
        assert report.hhicb == pytest.approx(2.0)
        assert report.relative_entropy == pytest.approx(0.0)
        assert 'without points' in caplog.text

    def test_bounds(self, planted_six):
        for w in (2, 3):
            report = index_report('planted', planted_six, w)
            assert 1.0 <= report.hhicb <= 6.0
            assert 0.0 <= report.relative_entropy <= 1.0

    def test_points_per_win_changes_index(self, three_teams):
        assert index_report('s', three_teams, 2).hhicb != index_report('s', three_teams, 3).hhicb

    @pytest.mark.parametrize('scale', [2, 7, 1000])
    def test_scaling_points_leaves_indices(self, planted_six, scale):
        pt = points_table(planted_six)
        scaled = PointsTable(teams=pt.teams, points=pt.points * scale)

        assert hhicb(scaled) == pytest.approx(hhicb(pt), rel=1e-12)
        assert relative_entropy(scaled) == pytest.approx(relative_entropy(pt), rel=1e-12)

    def test_team_order_leaves_indices(self, planted_six, rng):
        base = index_report('s', planted_six)

        for _ in range(10):
            permuted = planted_six.permuted(rng.permutation(planted_six.n_teams).tolist())
            report = index_report('s', permuted)
            assert report.hhicb == pytest.approx(base.hhicb, rel=1e-12)
            assert report.relative_entropy == pytest.approx(base.relative_entropy, rel=1e-12)

    def test_degenerate(self):
        pt = PointsTable(teams=('A', 'B'), points=np.array([0, 0]))

        with pytest.raises(DegenerateSeason):
            hhicb(pt)


class TestAcrossSeasons:
    @pytest.fixture
    def reports(self):
        return [
            IndexReport('2019', 1.10, 0.96),
            IndexReport('2020', 1.20, 0.94),
            IndexReport('2021', 1.30, 0.90),
        ]

    def test_frame_leaves_missing_fits_empty(self, reports):
        frame = reports_frame(reports, {'2019': 0.2})

        assert frame['season'].tolist() == ['2019', '2020', '2021']
        assert frame.loc[0, 'pi_k1'] == pytest.approx(0.2)
        assert frame['pi_k1'].isna().tolist() == [False, True, True]

    def test_rank_correlation(self, reports):
        overlay = index_vs_posterior(reports, {'2019': 0.9, '2020': 0.5, '2021': 0.1})

        assert overlay['spearman_hhicb'] == pytest.approx(-1.0)
        assert overlay['spearman_relative_entropy'] == pytest.approx(1.0)

    def test_partial_overlap_logged(self, reports, caplog):
        with caplog.at_level(logging.WARNING, logger='blockleague.indices'):
            overlay = index_vs_posterior(reports, {'2019': 0.9, '2021': 0.1})

        assert overlay['seasons'] == ['2019', '2021']
        assert 'left out' in caplog.text

    def test_constant_series(self, reports):
        overlay = index_vs_posterior(reports, {'2019': 0.5, '2020': 0.5, '2021': 0.5})

        assert overlay['spearman_hhicb'] is None

    def test_nothing_paired(self, reports):
        with pytest.raises(InvalidInput):
            index_vs_posterior(reports, {'1999': 0.5})

    def test_trend(self):
        assert linear_trend([1.0, 1.5, 2.0, 2.5]) == pytest.approx(0.5)
        with pytest.raises(InvalidInput):
            linear_trend([1.0])
