"""League data: match ingestion, results matrices and points tables."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import TYPE_CHECKING, BinaryIO

import numpy as np
import pandas as pd

from blockleague.exceptions import (
    ConfigurationError,
    DegenerateSeason,
    DuplicateFixture,
    IncompleteSeason,
    InvalidInput,
    ParseError,
)

if TYPE_CHECKING:
    from collections.abc import Sequence

    from blockleague.types import CountArray, FloatArray, MatchFormat, OutcomeArray

logger = logging.getLogger(__name__)

DIAGONAL_MARK = '-'
_OUTCOME_LETTERS = {'H': 1, 'D': 2, 'A': 3}
_HEADER_WORDS = {'home', 'home_team', 'hometeam', 'team'}


class Outcome(IntEnum):
    """Result of a fixture from the home team's point of view."""

    HOME_WIN = 1
    DRAW = 2
    HOME_LOSS = 3

    @classmethod
    def from_letter(cls, letter: str) -> Outcome:
        """Map an ``H``/``D``/``A`` result letter to an outcome.

        Raises:
            KeyError: If the letter is not one of ``H``, ``D``, ``A``
        """
        return cls(_OUTCOME_LETTERS[letter.strip().upper()])

    @classmethod
    def from_goals(cls, home_goals: int, away_goals: int) -> Outcome:
        """Map a scoreline to an outcome; goal counts are discarded afterwards."""
        if home_goals > away_goals:
            return cls.HOME_WIN
        if home_goals == away_goals:
            return cls.DRAW
        return cls.HOME_LOSS

    @property
    def letter(self) -> str:
        """Result letter used by the outcome CSV format."""
        return 'HDA'[self.value - 1]


@dataclass(frozen=True, eq=False)
class ResultsMatrix:
    """Dense N×N categorical adjacency of home-game outcomes.

    ``outcomes[i, j]`` holds the :class:`Outcome` code of team ``i`` at home against team
    ``j``; the diagonal is stored as 0 and never read.
    """

    teams: tuple[str, ...]
    outcomes: OutcomeArray = field(repr=False)

    def __post_init__(self) -> None:
        n = len(self.teams)
        if n < 2:
            msg = 'a results matrix needs at least two teams'
            raise InvalidInput(msg)
        if len(set(self.teams)) != n:
            msg = 'team identifiers must be unique'
            raise InvalidInput(msg)
        outcomes = np.asarray(self.outcomes, dtype=np.int8)
        if outcomes.shape != (n, n):
            msg = f'outcome array must be {n}x{n}, got {outcomes.shape}'
            raise InvalidInput(msg)
        off_diagonal = ~np.eye(n, dtype=bool)
        if not np.isin(outcomes[off_diagonal], (1, 2, 3)).all():
            msg = 'every off-diagonal cell must hold an outcome code 1, 2 or 3'
            raise InvalidInput(msg)
        outcomes = outcomes.copy()
        np.fill_diagonal(outcomes, 0)
        outcomes.setflags(write=False)
        object.__setattr__(self, 'teams', tuple(self.teams))
        object.__setattr__(self, 'outcomes', outcomes)

    @property
    def n_teams(self) -> int:
        """Number of teams N."""
        return len(self.teams)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResultsMatrix):
            return NotImplemented
        return self.teams == other.teams and np.array_equal(self.outcomes, other.outcomes)

    def __hash__(self) -> int:
        return hash((self.teams, self.outcomes.tobytes()))

    def index_of(self, team: str) -> int:
        """Position of ``team`` in the team order."""
        try:
            return self.teams.index(team)
        except ValueError:
            msg = f'unknown team {team!r}'
            raise InvalidInput(msg) from None

    def outcome(self, home: str, away: str) -> Outcome:
        """Outcome of the fixture ``home`` vs ``away``."""
        return Outcome(int(self.outcomes[self.index_of(home), self.index_of(away)]))

    def permuted(self, order: Sequence[int]) -> ResultsMatrix:
        """Results matrix with teams (rows and columns) reordered."""
        idx = np.asarray(order, dtype=np.int64)
        if sorted(idx.tolist()) != list(range(self.n_teams)):
            msg = 'order must be a permutation of team positions'
            raise InvalidInput(msg)
        return ResultsMatrix(
            teams=tuple(self.teams[i] for i in idx),
            outcomes=self.outcomes[np.ix_(idx, idx)],
        )

    def to_matrix_frame(self) -> pd.DataFrame:
        """Grid form: one row per home team, ``-`` on the diagonal."""
        grid = self.outcomes.astype(object)
        np.fill_diagonal(grid, DIAGONAL_MARK)
        return pd.DataFrame(grid, index=list(self.teams), columns=list(self.teams))

    def to_matrix_csv(self) -> str:
        """Serialize as a header of team ids followed by N rows of N entries."""
        frame = self.to_matrix_frame()
        return frame.to_csv(index=False, lineterminator='\n')

    def to_outcome_csv(self) -> str:
        """Serialize as ``home,away,result`` rows with ``H``/``D``/``A`` results."""
        rows = [
            (home, away, Outcome(int(self.outcomes[i, j])).letter)
            for i, home in enumerate(self.teams)
            for j, away in enumerate(self.teams)
            if i != j
        ]
        frame = pd.DataFrame(rows, columns=['home', 'away', 'result'])
        return frame.to_csv(index=False, lineterminator='\n')

    @classmethod
    def from_matrix_csv(cls, text: str) -> ResultsMatrix:
        """Parse the grid serialization written by :meth:`to_matrix_csv`."""
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False)
        teams = tuple(str(c) for c in frame.columns)
        if frame.shape != (len(teams), len(teams)):
            msg = f'grid must be square, got {frame.shape[0]} rows for {len(teams)} teams'
            raise ParseError(msg)
        values = frame.to_numpy()
        outcomes = np.zeros((len(teams), len(teams)), dtype=np.int8)
        for i in range(len(teams)):
            for j in range(len(teams)):
                cell = values[i, j].strip()
                if i == j:
                    if cell != DIAGONAL_MARK:
                        msg = f'diagonal entry must be {DIAGONAL_MARK!r}'
                        raise ParseError(msg, row=i + 1)
                    continue
                if cell not in {'1', '2', '3'}:
                    msg = f'unknown outcome code {cell!r}'
                    raise ParseError(msg, row=i + 1)
                outcomes[i, j] = int(cell)
        return cls(teams=teams, outcomes=outcomes)


@dataclass(frozen=True, eq=False)
class PointsTable:
    """Points and points shares per team under a points-per-win scheme."""

    teams: tuple[str, ...]
    points: CountArray = field(repr=False)
    points_per_win: int = 3

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=np.int64)
        if points.shape != (len(self.teams),):
            msg = 'one points entry per team is required'
            raise InvalidInput(msg)
        if (points < 0).any():
            msg = 'points must be non-negative'
            raise InvalidInput(msg)
        _validate_points_per_win(self.points_per_win)
        points = points.copy()
        points.setflags(write=False)
        object.__setattr__(self, 'teams', tuple(self.teams))
        object.__setattr__(self, 'points', points)

    @property
    def n_teams(self) -> int:
        """Number of teams n."""
        return len(self.teams)

    @property
    def total(self) -> int:
        """Sum of all teams' points."""
        return int(self.points.sum())

    @property
    def shares(self) -> FloatArray:
        """Points shares ``p_i = s_i / Σ s_j``.

        Raises:
            DegenerateSeason: If no team has any points
        """
        total = self.total
        if total == 0:
            msg = 'points table has no points to share'
            raise DegenerateSeason(msg)
        return self.points / float(total)

    def to_frame(self) -> pd.DataFrame:
        """Points table sorted by points, highest first."""
        frame = pd.DataFrame({'team': list(self.teams), 'points': self.points})
        if self.total > 0:
            frame['share'] = self.shares
        return frame.sort_values(['points', 'team'], ascending=[False, True]).reset_index(
            drop=True
        )


def _validate_points_per_win(points_per_win: int) -> None:
    if points_per_win not in (2, 3):
        msg = f'points per win must be 2 or 3, got {points_per_win}'
        raise ConfigurationError(msg)


def _read_rows(raw: bytes | str | BinaryIO) -> pd.DataFrame:
    if isinstance(raw, bytes):
        raw = io.BytesIO(raw)
    elif isinstance(raw, str):
        raw = io.BytesIO(raw.encode('utf-8'))
    try:
        return pd.read_csv(
            raw,
            header=None,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            comment='#',
            encoding='utf-8',
        )
    except pd.errors.EmptyDataError:
        msg = 'match file is empty'
        raise ParseError(msg) from None
    except pd.errors.ParserError as e:
        msg = f'malformed CSV: {e}'
        raise ParseError(msg) from None
    except UnicodeDecodeError as e:
        msg = f'match file is not valid UTF-8 (byte {e.start}: {e.reason})'
        raise ParseError(msg) from None


def _looks_like_header(first: list[str]) -> bool:
    return first[0].strip().lower() in _HEADER_WORDS


def _infer_format(n_columns: int) -> MatchFormat:
    if n_columns == 3:
        return 'outcome'
    if n_columns == 4:
        return 'goals'
    msg = f'cannot infer match format from {n_columns} columns'
    raise ParseError(msg)


def _parse_payload(payload: list[str], fmt: MatchFormat, row: int) -> Outcome:
    if fmt == 'outcome':
        if len(payload) != 1:
            msg = 'outcome format expects one result column'
            raise ParseError(msg, row=row)
        try:
            return Outcome.from_letter(payload[0])
        except KeyError:
            msg = f'unknown result {payload[0]!r}, expected H, D or A'
            raise ParseError(msg, row=row) from None
    if len(payload) != 2:
        msg = 'goals format expects home and away goal columns'
        raise ParseError(msg, row=row)
    try:
        home_goals, away_goals = (int(g) for g in payload)
    except ValueError:
        msg = f'goal counts must be integers, got {payload!r}'
        raise ParseError(msg, row=row) from None
    if home_goals < 0 or away_goals < 0:
        msg = 'goal counts must be non-negative'
        raise ParseError(msg, row=row)
    return Outcome.from_goals(home_goals, away_goals)


def parse_match_csv(
    raw: bytes | str | BinaryIO,
    fmt: MatchFormat | None = None,
    teams: Sequence[str] | None = None,
) -> ResultsMatrix:
    """Build a results matrix from a match CSV.

    Rows are ``home,away,H|D|A`` (outcome format) or ``home,away,home_goals,away_goals``
    (goals format). A header row is optional. Lines starting with ``#`` are ignored.

    Args:
        raw: CSV bytes, text, or a binary stream
        fmt: ``'outcome'`` or ``'goals'``; inferred from the column count when omitted
        teams: Team order to use instead of first-appearance order

    Returns:
        The season's results matrix

    Raises:
        ParseError: On malformed rows or unknown payloads
        DuplicateFixture: If an ordered pair appears twice
        IncompleteSeason: If some ordered pairs have no result
    """
    frame = _read_rows(raw)
    rows = [[str(v) for v in r] for r in frame.itertuples(index=False, name=None)]
    if rows and _looks_like_header(rows[0]):
        rows = rows[1:]
    if not rows:
        msg = 'match file has no fixtures'
        raise ParseError(msg)
    if fmt is None:
        fmt = _infer_format(frame.shape[1])

    results: dict[tuple[str, str], Outcome] = {}
    order: list[str] = list(teams) if teams is not None else []
    known = set(order)
    for number, row in enumerate(rows, start=1):
        cells = [c.strip() for c in row if c.strip() != '']
        if len(cells) < 3:
            msg = 'expected home, away and a result'
            raise ParseError(msg, row=number)
        home, away, payload = cells[0], cells[1], cells[2:]
        if home == away:
            msg = f'team {home!r} cannot play itself'
            raise ParseError(msg, row=number)
        for team in (home, away):
            if team not in known:
                if teams is not None:
                    msg = f'team {team!r} is not in the supplied team list'
                    raise ParseError(msg, row=number)
                known.add(team)
                order.append(team)
        if (home, away) in results:
            raise DuplicateFixture(home, away, row=number)
        results[(home, away)] = _parse_payload(payload, fmt, number)

    missing = [(h, a) for h in order for a in order if h != a and (h, a) not in results]
    if missing:
        raise IncompleteSeason(missing)

    position = {team: i for i, team in enumerate(order)}
    outcomes = np.zeros((len(order), len(order)), dtype=np.int8)
    for (home, away), outcome in results.items():
        outcomes[position[home], position[away]] = outcome.value
    logger.debug('parsed %d fixtures for %d teams', len(results), len(order))
    return ResultsMatrix(teams=tuple(order), outcomes=outcomes)


def read_season(path: str | Path, fmt: MatchFormat | None = None) -> ResultsMatrix:
    """Read a season file from disk; see :func:`parse_match_csv`."""
    results = parse_match_csv(Path(path).read_bytes(), fmt=fmt)
    logger.info('read %s: %d teams', Path(path).name, results.n_teams)
    return results


def team_records(r: ResultsMatrix) -> pd.DataFrame:
    """Wins, draws and losses per team, home and away combined."""
    y = r.outcomes
    wins = (y == Outcome.HOME_WIN).sum(axis=1) + (y == Outcome.HOME_LOSS).sum(axis=0)
    losses = (y == Outcome.HOME_LOSS).sum(axis=1) + (y == Outcome.HOME_WIN).sum(axis=0)
    draws = (y == Outcome.DRAW).sum(axis=1) + (y == Outcome.DRAW).sum(axis=0)
    return pd.DataFrame(
        {
            'team': list(r.teams),
            'played': 2 * (r.n_teams - 1),
            'wins': wins.astype(np.int64),
            'draws': draws.astype(np.int64),
            'losses': losses.astype(np.int64),
        }
    )


def points_table(r: ResultsMatrix, w: int = 3) -> PointsTable:
    """Points per team: ``w`` per win, 1 per draw, 0 per loss.

    Args:
        r: Season results
        w: Points per win, 2 or 3

    Returns:
        Points table in the results matrix's team order
    """
    _validate_points_per_win(w)
    records = team_records(r)
    points = w * records['wins'].to_numpy() + records['draws'].to_numpy()
    return PointsTable(teams=r.teams, points=points, points_per_win=w)


def outcome_shares(r: ResultsMatrix) -> pd.DataFrame:
    """Percentage of wins, draws and losses per team, ordered by final points."""
    records = team_records(r)
    played = records['played']
    table = points_table(r)
    frame = pd.DataFrame(
        {
            'team': records['team'],
            'points': table.points,
            'win_pct': 100.0 * records['wins'] / played,
            'draw_pct': 100.0 * records['draws'] / played,
            'loss_pct': 100.0 * records['losses'] / played,
        }
    )
    return frame.sort_values(['points', 'team'], ascending=[False, True]).reset_index(drop=True)
