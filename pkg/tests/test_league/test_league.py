"""Tests for match ingestion and points tables."""

import numpy as np
import pytest

from blockleague.exceptions import (
    ConfigurationError,
    DegenerateSeason,
    DuplicateFixture,
    IncompleteSeason,
    InvalidInput,
    ParseError,
)
from blockleague.league import (
    Outcome,
    PointsTable,
    ResultsMatrix,
    outcome_shares,
    parse_match_csv,
    points_table,
    team_records,
)


class TestOutcome:
    def test_letters(self):
        assert Outcome.from_letter('H') is Outcome.HOME_WIN
        assert Outcome.from_letter('d') is Outcome.DRAW
        assert Outcome.from_letter('A') is Outcome.HOME_LOSS

    def test_goals(self):
        assert Outcome.from_goals(3, 1) is Outcome.HOME_WIN
        assert Outcome.from_goals(2, 2) is Outcome.DRAW
        assert Outcome.from_goals(0, 1) is Outcome.HOME_LOSS

    def test_unknown_letter(self):
        with pytest.raises(KeyError):
            Outcome.from_letter('X')


class TestParseMatchCsv:
    def test_outcome_row(self):
        r = parse_match_csv('MCI,NOR,H\nNOR,MCI,A\n')

        assert r.teams == ('MCI', 'NOR')
        assert r.outcome('MCI', 'NOR') is Outcome.HOME_WIN
        assert r.outcome('NOR', 'MCI') is Outcome.HOME_LOSS

    def test_goals_row_draw(self):
        r = parse_match_csv('BUR,WAT,2,2\nWAT,BUR,1,0\n')

        assert r.outcomes[r.index_of('BUR'), r.index_of('WAT')] == 2
        assert r.outcomes[r.index_of('WAT'), r.index_of('BUR')] == 1

    def test_header_and_comments_skipped(self):
        raw = '# season 1\nhome,away,result\nA,B,D\nB,A,H\n'

        r = parse_match_csv(raw)

        assert r.teams == ('A', 'B')
        assert r.outcome('A', 'B') is Outcome.DRAW

    def test_explicit_team_order(self):
        r = parse_match_csv('A,B,H\nB,A,H\n', teams=['B', 'A'])

        assert r.teams == ('B', 'A')

    def test_incomplete_season_lists_missing_pair(self):
        raw = 'A,B,H\nB,A,H\nA,C,D\nC,A,A\nB,C,H\n'

        with pytest.raises(IncompleteSeason) as exc_info:
            parse_match_csv(raw)

        assert exc_info.value.missing == [('C', 'B')]

    def test_duplicate_fixture(self):
        with pytest.raises(DuplicateFixture) as exc_info:
            parse_match_csv('A,B,H\nA,B,D\nB,A,H\n')

        assert exc_info.value.row == 2
        assert (exc_info.value.home, exc_info.value.away) == ('A', 'B')

    def test_unknown_payload_reports_row(self):
        with pytest.raises(ParseError, match='row 2'):
            parse_match_csv('A,B,H\nB,A,W\n')

    def test_bad_goals(self):
        with pytest.raises(ParseError):
            parse_match_csv('A,B,x,1\nB,A,1,1\n')

    def test_self_pair_rejected(self):
        with pytest.raises(ParseError):
            parse_match_csv('A,A,H\n')

    def test_empty_file(self):
        with pytest.raises(ParseError):
            parse_match_csv('')

    def test_invalid_utf8(self):
        with pytest.raises(ParseError, match='UTF-8'):
            parse_match_csv(b'A,B,H\nB,A,\xff\xfe\n')

    def test_outcome_csv_round_trip(self, three_teams):
        assert parse_match_csv(three_teams.to_outcome_csv()) == three_teams

    def test_row_order_does_not_change_points(self, three_teams):
        lines = three_teams.to_outcome_csv().splitlines()
        shuffled = '\n'.join([lines[0], *reversed(lines[1:])]) + '\n'

        r = parse_match_csv(shuffled, teams=three_teams.teams)

        assert np.array_equal(points_table(r).points, points_table(three_teams).points)


class TestResultsMatrix:
    def test_rejects_single_team(self):
        with pytest.raises(InvalidInput):
            ResultsMatrix(teams=('A',), outcomes=np.zeros((1, 1)))

    def test_rejects_bad_codes(self):
        with pytest.raises(InvalidInput):
            ResultsMatrix(teams=('A', 'B'), outcomes=np.array([[0, 4], [1, 0]]))

    def test_rejects_duplicate_teams(self):
        with pytest.raises(InvalidInput):
            ResultsMatrix(teams=('A', 'A'), outcomes=np.array([[0, 1], [1, 0]]))

    def test_matrix_csv_round_trip(self, three_teams):
        text = three_teams.to_matrix_csv()

        assert text.splitlines()[0] == 'A,B,C'
        assert text.splitlines()[1] == '-,1,1'
        assert ResultsMatrix.from_matrix_csv(text) == three_teams

    def test_permuted(self, three_teams):
        permuted = three_teams.permuted([2, 0, 1])

        assert permuted.teams == ('C', 'A', 'B')
        assert permuted.outcome('C', 'B') is three_teams.outcome('C', 'B')

    def test_outcomes_read_only(self, two_teams):
        with pytest.raises(ValueError):
            two_teams.outcomes[0, 1] = 2


class TestPointsTable:
    def test_two_team_example(self):
        r = ResultsMatrix(teams=('T1', 'T2'), outcomes=np.array([[0, 1], [2, 0]]))

        pt = points_table(r, 3)

        assert pt.points.tolist() == [4, 1]
        assert pt.shares == pytest.approx([0.8, 0.2])

    def test_all_draws_equal_shares(self, all_draws):
        pt = points_table(all_draws)

        assert pt.shares == pytest.approx([0.25] * 4)
        assert pt.shares.sum() == pytest.approx(1.0, abs=1e-12)

    def test_two_points_per_win(self, three_teams):
        assert points_table(three_teams, 2).points.tolist() == [8, 1, 3]
        assert points_table(three_teams, 3).points.tolist() == [12, 1, 4]

    def test_invalid_scheme(self, three_teams):
        with pytest.raises(ConfigurationError):
            points_table(three_teams, 4)

    def test_zero_points_degenerate(self):
        pt = PointsTable(teams=('A', 'B'), points=np.array([0, 0]))

        with pytest.raises(DegenerateSeason):
            _ = pt.shares

    def test_wins_balance_losses(self, planted_six):
        records = team_records(planted_six)

        assert records['wins'].sum() == records['losses'].sum()
        assert (records['wins'] + records['draws'] + records['losses'] == 10).all()


class TestOutcomeShares:
    def test_percentages(self, three_teams):
        shares = outcome_shares(three_teams)

        assert shares['team'].tolist() == ['A', 'C', 'B']
        top = shares.iloc[0]
        assert top['win_pct'] == pytest.approx(100.0)
        assert (shares[['win_pct', 'draw_pct', 'loss_pct']].sum(axis=1)).tolist() == (
            pytest.approx([100.0] * 3)
        )
