"""blockleague package.

Bayesian stochastic block models for competitive balance in football leagues.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version('blockleague')
except PackageNotFoundError:
    # fallback for development
    __version__ = 'unknown'

from blockleague.exceptions import (
    BlockLeagueError,
    ConfigurationError,
    DegenerateSeason,
    DuplicateFixture,
    IncompleteSeason,
    InvalidInput,
    InvalidState,
    ParseError,
    TooLarge,
)
from blockleague.league import (
    Outcome,
    PointsTable,
    ResultsMatrix,
    parse_match_csv,
    points_table,
    read_season,
)
from blockleague.model import (
    BlockState,
    PriorConfig,
    SufficientStats,
    compute_stats,
    log_collapsed_posterior,
    stats_delta_move,
)
from blockleague.oracle import exact_posterior_oracle
from blockleague.posterior import (
    InteractionPosterior,
    PosteriorSummary,
    identify_strongest,
    interaction_posterior,
    orient_trace,
    summarize,
)
from blockleague.relabel import Permutation, RelabeledTrace, allocation_distance, relabel_trace
from blockleague.sampler import SamplerConfig, Trace, run_sampler

__all__ = [
    'BlockLeagueError',
    'BlockState',
    'ConfigurationError',
    'DegenerateSeason',
    'DuplicateFixture',
    'IncompleteSeason',
    'InteractionPosterior',
    'InvalidInput',
    'InvalidState',
    'Outcome',
    'ParseError',
    'Permutation',
    'PointsTable',
    'PosteriorSummary',
    'PriorConfig',
    'RelabeledTrace',
    'ResultsMatrix',
    'SamplerConfig',
    'SufficientStats',
    'TooLarge',
    'Trace',
    'allocation_distance',
    'compute_stats',
    'exact_posterior_oracle',
    'identify_strongest',
    'interaction_posterior',
    'log_collapsed_posterior',
    'orient_trace',
    'parse_match_csv',
    'points_table',
    'read_season',
    'relabel_trace',
    'run_sampler',
    'stats_delta_move',
    'summarize',
]
