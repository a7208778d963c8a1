"""Synthetic seasons drawn from the categorical-edge block model."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from blockleague.exceptions import ConfigurationError
from blockleague.league import ResultsMatrix
from blockleague.model import N_OUTCOMES, BlockState

if TYPE_CHECKING:
    from collections.abc import Sequence

    from blockleague.types import FloatArray, JSONDict

logger = logging.getLogger(__name__)

#: home win, draw and home loss shares of an evenly matched fixture
BASE_OUTCOMES = (0.45, 0.25, 0.30)


def separated_interactions(
    k: int, separation: float, base: Sequence[float] = BASE_OUTCOMES
) -> FloatArray:
    """Interaction array in which lower-labelled blocks beat higher-labelled ones.

    Against a weaker block, a share ``separation`` of the draw and loss mass moves to the
    stronger side's win; the reverse fixture mirrors this. Within-block pairs keep ``base``.

    Raises:
        ConfigurationError: If ``separation`` is outside [0, 1] or ``base`` is not a
            distribution
    """
    if not 0.0 <= separation <= 1.0:
        msg = f'separation must lie in [0, 1], got {separation}'
        raise ConfigurationError(msg)
    win, draw, loss = (float(v) for v in base)
    if min(win, draw, loss) < 0 or not np.isclose(win + draw + loss, 1.0):
        msg = 'base outcome shares must be non-negative and sum to 1'
        raise ConfigurationError(msg)
    s = separation
    p = np.empty((k, k, N_OUTCOMES))
    p[:, :] = (win, draw, loss)
    stronger_home = (win + s * (draw + loss), (1 - s) * draw, (1 - s) * loss)
    weaker_home = ((1 - s) * win, (1 - s) * draw, loss + s * (win + draw))
    for kh in range(k):
        for ka in range(k):
            if kh < ka:
                p[kh, ka] = stronger_home
            elif kh > ka:
                p[kh, ka] = weaker_home
    return p


@dataclass(frozen=True, eq=False)
class SimulationConfig:
    """Block sizes, outcome probabilities and seed of a synthetic season.

    Exactly one of ``interactions`` (shape ``(K, K, 3)``) and ``separation`` is used;
    with neither, blocks are indistinguishable.
    """

    block_sizes: tuple[int, ...]
    interactions: FloatArray | None = field(default=None, repr=False)
    separation: float | None = None
    rng_seed: int = 1
    team_prefix: str = 'T'

    def __post_init__(self) -> None:
        sizes = tuple(int(n) for n in self.block_sizes)
        if not sizes or any(n < 1 for n in sizes):
            msg = 'every block needs at least one team'
            raise ConfigurationError(msg)
        if sum(sizes) < 2:
            msg = 'a season needs at least two teams'
            raise ConfigurationError(msg)
        object.__setattr__(self, 'block_sizes', sizes)
        if self.interactions is not None and self.separation is not None:
            msg = 'give either interactions or separation, not both'
            raise ConfigurationError(msg)

        k = len(sizes)
        if self.interactions is None:
            p = separated_interactions(k, 0.0 if self.separation is None else self.separation)
        else:
            p = np.asarray(self.interactions, dtype=np.float64)
        if p.shape != (k, k, N_OUTCOMES):
            msg = f'interactions must have shape ({k}, {k}, 3), got {p.shape}'
            raise ConfigurationError(msg)
        if (p < 0).any() or not np.allclose(p.sum(axis=-1), 1.0, atol=1e-9):
            msg = 'every interaction row must be a probability vector summing to 1'
            raise ConfigurationError(msg)
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, 'interactions', p)

    @property
    def k(self) -> int:
        """Number of planted blocks."""
        return len(self.block_sizes)

    @property
    def n_teams(self) -> int:
        """Number of teams."""
        return sum(self.block_sizes)


@dataclass(frozen=True, eq=False)
class SimulatedSeason:
    """Synthetic results with the planted truth."""

    results: ResultsMatrix
    truth: BlockState
    interactions: FloatArray = field(repr=False)
    rng_seed: int = 1

    def truth_dict(self) -> JSONDict:
        """Planted labels (1-based), K, interaction array and seed."""
        return {
            'k': self.truth.k,
            'z': dict(zip(self.results.teams, self.truth.labels.tolist(), strict=True)),
            'p': self.interactions.tolist(),
            'rng_seed': self.rng_seed,
        }


def simulate_season(cfg: SimulationConfig) -> SimulatedSeason:
    """Draw every fixture's outcome from the planted block pair's distribution."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.rng_seed)))
    n = cfg.n_teams
    z = np.repeat(np.arange(cfg.k), cfg.block_sizes)
    width = len(str(n))
    teams = tuple(f'{cfg.team_prefix}{i + 1:0{width}d}' for i in range(n))

    home, away = np.nonzero(~np.eye(n, dtype=bool))
    p = np.asarray(cfg.interactions)[z[home], z[away]]
    u = rng.random(home.size)
    codes = 1 + (u[:, None] >= np.cumsum(p, axis=1)[:, :-1]).sum(axis=1)

    outcomes = np.zeros((n, n), dtype=np.int8)
    outcomes[home, away] = codes
    logger.info('simulated %d teams in %d blocks, seed %d', n, cfg.k, cfg.rng_seed)
    return SimulatedSeason(
        results=ResultsMatrix(teams=teams, outcomes=outcomes),
        truth=BlockState(z=z, k=cfg.k),
        interactions=np.asarray(cfg.interactions),
        rng_seed=cfg.rng_seed,
    )
