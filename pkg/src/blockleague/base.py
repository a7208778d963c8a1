"""Base MCMC move interface and the mutable chain state moves act on."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

from blockleague.exceptions import ConfigurationError
from blockleague.model import (
    BlockState,
    IndexedResults,
    PriorConfig,
    SufficientStats,
    log_collapsed_posterior_closed_form,
    log_collapsed_posterior_general,
)
from blockleague.utils import DirichletMultinomialTable

if TYPE_CHECKING:
    from blockleague.league import ResultsMatrix
    from blockleague.types import CountArray, LabelArray


@dataclass
class ChainState:
    """Current (z, K) of one Markov chain together with its sufficient statistics.

    ``z`` is a private writable copy; ``stats`` always matches ``(z, k)``.
    """

    z: LabelArray
    k: int
    stats: SufficientStats

    @classmethod
    def start(cls, state: BlockState, stats: SufficientStats) -> ChainState:
        """Chain positioned at ``state``; ``stats`` is adopted, not copied."""
        return cls(z=np.array(state.z, dtype=np.int64), k=state.k, stats=stats)

    @property
    def n(self) -> int:
        """Number of teams."""
        return int(self.z.size)

    def snapshot(self) -> BlockState:
        """Immutable copy of the current state."""
        return BlockState(z=self.z.copy(), k=self.k)


class BaseMove(ABC):
    """Abstract base class for the sampler's move types."""

    #: attempt kinds this move reports acceptance for
    kinds: tuple[str, ...] = ()

    def __init__(
        self,
        prior: PriorConfig,
        index: IndexedResults | None = None,
        *,
        n: int | None = None,
        **kwargs: Any,
    ) -> None:
        """Initialize a move.

        Args:
            prior: Prior configuration of the model
            index: Indexed results of the season being sampled
            n: Number of teams, for moves that never look at the results
            **kwargs: Move-specific parameters
        """
        if index is None and n is None:
            msg = 'a move needs either the indexed results or the number of teams'
            raise ConfigurationError(msg)
        self.prior = prior
        self._index = index
        self.n = index.n if index is not None else int(n)  # type: ignore[arg-type]
        # every block-pair cell holds at most n(n-1) games
        self._log_table = DirichletMultinomialTable(prior.beta_array, self.n * (self.n - 1))

        self._attempts: dict[str, int] = dict.fromkeys(self.kinds, 0)
        self._accepts: dict[str, int] = dict.fromkeys(self.kinds, 0)

        self._validate_config()

    @property
    def index(self) -> IndexedResults:
        """Indexed results of the season."""
        if self._index is None:
            msg = f'{type(self).__name__} was built without results'
            raise ConfigurationError(msg)
        return self._index

    def _validate_config(self) -> None:
        """Validate move configuration; subclasses extend as needed."""

    @abstractmethod
    def step(self, chain: ChainState, rng: np.random.Generator) -> bool:
        """Attempt the move once, updating ``chain`` in place on acceptance.

        Args:
            chain: Chain state to update
            rng: Random generator owned by the chain

        Returns:
            True if the chain moved
        """

    def _record(self, kind: str, accepted: bool) -> bool:
        self._attempts[kind] += 1
        if accepted:
            self._accepts[kind] += 1
        return accepted

    def _block_terms(self, counts: CountArray) -> float:
        """Sum of the collapsed block-pair factors over ``counts``, read from the lookup table."""
        return self._log_table.total(counts)

    def _log_posterior(self, stats: SufficientStats, k: int) -> float:
        """Collapsed log posterior without re-validating the statistics."""
        if self.prior.is_unit:
            return log_collapsed_posterior_closed_form(stats, k, self.prior, self.n)
        return log_collapsed_posterior_general(stats, k, self.prior, self.n)

    def get_acceptance_stats(self) -> dict[str, dict[str, float]]:
        """Attempts, acceptances and acceptance rate per attempt kind.

        Returns:
            Mapping from attempt kind to its counters
        """
        stats: dict[str, dict[str, float]] = {}
        for kind in self.kinds:
            attempts = self._attempts[kind]
            accepts = self._accepts[kind]
            stats[kind] = {
                'attempts': attempts,
                'accepts': accepts,
                'rate': accepts / attempts if attempts > 0 else 0.0,
            }
        return stats


def bind(
    move_class: type[BaseMove],
    state: BlockState,
    stats: SufficientStats,
    r: ResultsMatrix | IndexedResults | None,
    prior: PriorConfig,
    **kwargs: Any,
) -> tuple[BaseMove, ChainState]:
    """Instantiate a move and a chain positioned at ``state``, validating both.

    ``stats`` is adopted by the chain so callers observe in-place updates. ``r`` may be
    None for moves that never look at the results.
    """
    index = r if r is None or isinstance(r, IndexedResults) else IndexedResults(r)
    state.validate_for(prior, None if index is None else index.n)
    stats.validate(state.k, state.n)
    move = move_class(prior, index, n=state.n, **kwargs)
    return move, ChainState.start(state, stats)
