"""Exception classes for blockleague."""

from __future__ import annotations


class BlockLeagueError(Exception):
    """Base exception for blockleague errors."""


class ConfigurationError(BlockLeagueError):
    """Raised when a prior, sampler or simulation configuration is invalid."""


class ParseError(BlockLeagueError):
    """Raised when a match file row cannot be interpreted."""

    def __init__(self, message: str, row: int | None = None) -> None:
        """Initialize parse error.

        Args:
            message: Human readable description
            row: 1-based data row number, if known
        """
        if row is not None:
            message = f'row {row}: {message}'
        super().__init__(message)
        self.row = row


class DuplicateFixture(BlockLeagueError):
    """Raised when the same ordered pair of teams appears twice in a season."""

    def __init__(self, home: str, away: str, row: int | None = None) -> None:
        """Initialize duplicate fixture error.

        Args:
            home: Home team identifier
            away: Away team identifier
            row: 1-based data row number of the repeated fixture
        """
        msg = f'duplicate fixture {home} vs {away}'
        if row is not None:
            msg = f'row {row}: {msg}'
        super().__init__(msg)
        self.home = home
        self.away = away
        self.row = row


class IncompleteSeason(BlockLeagueError):
    """Raised when some ordered pairs of teams have no result."""

    def __init__(self, missing: list[tuple[str, str]]) -> None:
        """Initialize incomplete season error.

        Args:
            missing: Ordered (home, away) pairs without a result
        """
        shown = ', '.join(f'{h} vs {a}' for h, a in missing[:10])
        if len(missing) > 10:
            shown += f', ... ({len(missing) - 10} more)'
        super().__init__(f'{len(missing)} missing fixture(s): {shown}')
        self.missing = missing


class InvalidState(BlockLeagueError):
    """Raised when a block state or its statistics are inconsistent."""


class InvalidInput(BlockLeagueError):
    """Raised when arguments have incompatible shapes or values."""


class TooLarge(BlockLeagueError):
    """Raised when exact enumeration would exceed the state budget."""

    def __init__(self, count: int, budget: int) -> None:
        """Initialize budget error.

        Args:
            count: Number of (z, K) states the enumeration would visit
            budget: Maximum number of states allowed
        """
        super().__init__(f'exact enumeration needs {count} states, budget is {budget}')
        self.count = count
        self.budget = budget


class DegenerateSeason(BlockLeagueError):
    """Raised when a season has no points to share out."""
