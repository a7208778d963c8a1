"""Stochastic block model core: priors, block states, sufficient statistics, collapsed posterior."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import gammaln

from blockleague.exceptions import ConfigurationError, InvalidInput, InvalidState
from blockleague.utils import (
    dirichlet_multinomial_log_terms,
    unit_dirichlet_multinomial_log_terms,
)

if TYPE_CHECKING:
    from collections.abc import Sequence

    from blockleague.league import ResultsMatrix
    from blockleague.types import CountArray, FloatArray, KPrior, LabelArray

N_OUTCOMES = 3
DEFAULT_K_MAX = 20


@dataclass(frozen=True)
class PriorConfig:
    """Priors of the collapsed model.

    Attributes:
        k_prior: ``'poisson'`` (zero-truncated Poisson, mass ∝ λ^K / K!) or ``'uniform'``
        k_max: Largest number of blocks allowed
        gamma0: Symmetric Dirichlet concentration of the block weights θ
        beta: Dirichlet concentrations of each block-pair outcome vector p_kl
        poisson_rate: λ of the truncated Poisson prior
    """

    k_prior: KPrior = 'poisson'
    k_max: int = DEFAULT_K_MAX
    gamma0: float = 1.0
    beta: tuple[float, float, float] = (1.0, 1.0, 1.0)
    poisson_rate: float = 1.0

    def __post_init__(self) -> None:
        if self.k_prior not in ('poisson', 'uniform'):
            msg = f"k_prior must be 'poisson' or 'uniform', got {self.k_prior!r}"
            raise ConfigurationError(msg)
        if self.k_max < 1:
            msg = 'k_max must be at least 1'
            raise ConfigurationError(msg)
        if self.gamma0 <= 0:
            msg = 'gamma0 must be positive'
            raise ConfigurationError(msg)
        if len(self.beta) != N_OUTCOMES or any(b <= 0 for b in self.beta):
            msg = 'beta must hold three positive concentrations'
            raise ConfigurationError(msg)
        if self.poisson_rate <= 0:
            msg = 'poisson_rate must be positive'
            raise ConfigurationError(msg)
        object.__setattr__(self, 'beta', tuple(float(b) for b in self.beta))

    @property
    def beta_array(self) -> FloatArray:
        """``beta`` as a float array."""
        return np.asarray(self.beta, dtype=np.float64)

    @property
    def is_unit(self) -> bool:
        """True when every concentration equals 1 and the closed forms apply."""
        return self.gamma0 == 1.0 and self.beta == (1.0, 1.0, 1.0)

    def log_k_prior(self, k: int) -> float:
        """Unnormalized log prior mass of ``k`` blocks (``-inf`` outside ``1..k_max``)."""
        if k < 1 or k > self.k_max:
            return -math.inf
        if self.k_prior == 'uniform':
            return 0.0
        return k * math.log(self.poisson_rate) - math.lgamma(k + 1)


@dataclass(frozen=True, eq=False)
class BlockState:
    """Allocation vector and number of blocks.

    Labels are stored 0-based (``0..k-1``); :attr:`labels` gives the 1-based form used in
    files. Empty blocks are allowed.
    """

    z: LabelArray = field(repr=False)
    k: int

    def __post_init__(self) -> None:
        z = np.array(self.z, dtype=np.int64)
        if z.ndim != 1 or z.size == 0:
            msg = 'allocation vector must be a non-empty 1-d array'
            raise InvalidState(msg)
        if self.k < 1:
            msg = 'number of blocks must be at least 1'
            raise InvalidState(msg)
        if z.min() < 0 or z.max() >= self.k:
            msg = f'labels must lie in 1..{self.k}'
            raise InvalidState(msg)
        z.setflags(write=False)
        object.__setattr__(self, 'z', z)

    @classmethod
    def from_labels(cls, labels: Sequence[int], k: int | None = None) -> BlockState:
        """Build a state from 1-based labels; ``k`` defaults to the largest label."""
        z = np.asarray(labels, dtype=np.int64) - 1
        return cls(z=z, k=int(z.max()) + 1 if k is None else k)

    @classmethod
    def single_block(cls, n: int) -> BlockState:
        """All ``n`` teams in one block."""
        return cls(z=np.zeros(n, dtype=np.int64), k=1)

    @property
    def labels(self) -> LabelArray:
        """1-based labels."""
        return self.z + 1

    @property
    def n(self) -> int:
        """Number of teams."""
        return int(self.z.size)

    @property
    def sizes(self) -> CountArray:
        """Block sizes ``n_k``."""
        return np.bincount(self.z, minlength=self.k).astype(np.int64)

    @property
    def n_nonempty(self) -> int:
        """Number of blocks with at least one team."""
        return int(np.count_nonzero(self.sizes))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BlockState):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.z, other.z)

    def __hash__(self) -> int:
        return hash((self.k, self.z.tobytes()))

    def validate_for(self, prior: PriorConfig, n: int | None = None) -> None:
        """Check the state against ``k_max`` and, optionally, the number of teams."""
        if self.k > prior.k_max:
            msg = f'{self.k} blocks exceed k_max = {prior.k_max}'
            raise InvalidState(msg)
        if n is not None and self.n != n:
            msg = f'allocation vector has {self.n} entries for {n} teams'
            raise InvalidState(msg)


@dataclass
class SufficientStats:
    """Outcome counts per ordered block pair and block sizes.

    ``counts[k, l, w]`` counts games with a block-``k`` team at home against a block-``l``
    team ending in outcome ``w + 1``. Mutated in place only by the sampler that owns it.
    """

    counts: CountArray
    sizes: CountArray

    @property
    def k(self) -> int:
        """Number of blocks the statistics are laid out for."""
        return int(self.sizes.size)

    def copy(self) -> SufficientStats:
        """Deep copy."""
        return SufficientStats(counts=self.counts.copy(), sizes=self.sizes.copy())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SufficientStats):
            return NotImplemented
        return np.array_equal(self.counts, other.counts) and np.array_equal(
            self.sizes, other.sizes
        )

    def validate(self, k: int, n: int) -> None:
        """Check shapes and totals against ``k`` blocks and ``n`` teams."""
        if self.counts.shape != (k, k, N_OUTCOMES) or self.sizes.shape != (k,):
            msg = f'statistics are laid out for {self.k} blocks, state has {k}'
            raise InvalidState(msg)
        if int(self.sizes.sum()) != n or int(self.counts.sum()) != n * (n - 1):
            msg = 'statistics do not cover every team and fixture exactly once'
            raise InvalidState(msg)
        if (self.counts < 0).any() or (self.sizes < 0).any():
            msg = 'statistics must be non-negative'
            raise InvalidState(msg)


class IndexedResults:
    """Results matrix laid out for fast per-team count updates.

    Holds 0-based outcome indices and, for every team, the positions of its opponents with
    the outcomes of its home and away games against them.
    """

    def __init__(self, r: ResultsMatrix) -> None:
        """Index a results matrix.

        Args:
            r: Season results
        """
        self.results = r
        n = r.n_teams
        self.n = n
        y = r.outcomes.astype(np.int64) - 1
        self.home_idx, self.away_idx = np.nonzero(~np.eye(n, dtype=bool))
        self.pair_outcomes = y[self.home_idx, self.away_idx]
        everyone = np.arange(n)
        self.opponents = [np.delete(everyone, i) for i in range(n)]
        self.home_outcomes = [y[i, self.opponents[i]] for i in range(n)]
        self.away_outcomes = [y[self.opponents[i], i] for i in range(n)]

    def stats(self, z: LabelArray, k: int) -> SufficientStats:
        """Sufficient statistics of allocation ``z`` over ``k`` blocks."""
        flat = (z[self.home_idx] * k + z[self.away_idx]) * N_OUTCOMES + self.pair_outcomes
        counts = np.bincount(flat, minlength=k * k * N_OUTCOMES).reshape(k, k, N_OUTCOMES)
        sizes = np.bincount(z, minlength=k)
        return SufficientStats(counts=counts.astype(np.int64), sizes=sizes.astype(np.int64))

    def team_profile(self, z: LabelArray, k: int, i: int) -> tuple[CountArray, CountArray]:
        """Outcome counts of team ``i``'s home and away games, grouped by opponent block.

        Returns:
            ``(home, away)`` arrays of shape ``(k, 3)``
        """
        opp = z[self.opponents[i]] * N_OUTCOMES
        size = k * N_OUTCOMES
        home = np.bincount(opp + self.home_outcomes[i], minlength=size).reshape(k, N_OUTCOMES)
        away = np.bincount(opp + self.away_outcomes[i], minlength=size).reshape(k, N_OUTCOMES)
        return home, away

    def move_counts(
        self, counts: CountArray, z: LabelArray, i: int, k0: int, k1: int
    ) -> CountArray:
        """Counts after moving team ``i`` from block ``k0`` to ``k1`` (input left untouched).

        Only rows and columns ``k0`` and ``k1`` change.
        """
        k = counts.shape[0]
        home, away = self.team_profile(z, k, i)
        moved = counts.copy()
        moved[k0] -= home
        moved[k1] += home
        moved[:, k0] -= away
        moved[:, k1] += away
        return moved


def compute_stats(r: ResultsMatrix | IndexedResults, s: BlockState) -> SufficientStats:
    """Count outcomes per ordered block pair and teams per block.

    Args:
        r: Season results (or an index built from them)
        s: Block state with one label per team

    Returns:
        Fresh sufficient statistics, within-block pairs included

    Raises:
        InvalidState: If the allocation vector does not match the number of teams
    """
    index = r if isinstance(r, IndexedResults) else IndexedResults(r)
    if s.n != index.n:
        msg = f'allocation vector has {s.n} entries for {index.n} teams'
        raise InvalidState(msg)
    return index.stats(s.z, s.k)


def stats_delta_move(
    stats: SufficientStats,
    r: ResultsMatrix | IndexedResults,
    s: BlockState,
    i: int,
    new_label: int,
) -> SufficientStats:
    """Statistics after moving team ``i`` to block ``new_label`` (0-based).

    Costs O(N): only block pairs involving the old or the new label are touched.

    Raises:
        InvalidState: If ``new_label`` is outside ``0..k-1``
        InvalidInput: If ``i`` is not a team position
    """
    if not 0 <= new_label < s.k:
        msg = f'label {new_label + 1} outside 1..{s.k}'
        raise InvalidState(msg)
    if not 0 <= i < s.n:
        msg = f'team position {i} outside 0..{s.n - 1}'
        raise InvalidInput(msg)
    old_label = int(s.z[i])
    if old_label == new_label:
        return stats.copy()
    index = r if isinstance(r, IndexedResults) else IndexedResults(r)
    counts = index.move_counts(stats.counts, s.z, i, old_label, new_label)
    sizes = stats.sizes.copy()
    sizes[old_label] -= 1
    sizes[new_label] += 1
    return SufficientStats(counts=counts, sizes=sizes)


def log_collapsed_posterior_closed_form(
    stats: SufficientStats, k: int, prior: PriorConfig, n: int
) -> float:
    """Unit-hyperparameter form: block, allocation and K-prior factors in log-gamma space."""
    return (
        float(unit_dirichlet_multinomial_log_terms(stats.counts).sum())
        + float(gammaln(stats.sizes + 1.0).sum())
        + math.lgamma(k)
        - math.lgamma(n + k)
        + prior.log_k_prior(k)
    )


def log_collapsed_posterior_general(
    stats: SufficientStats, k: int, prior: PriorConfig, n: int
) -> float:
    """Beta-function form valid for any ``gamma0`` and ``beta``."""
    beta = prior.beta_array
    gamma0 = prior.gamma0
    block = float(dirichlet_multinomial_log_terms(stats.counts, beta).sum())
    allocation = float(
        math.lgamma(k * gamma0)
        - k * math.lgamma(gamma0)
        + gammaln(stats.sizes + gamma0).sum()
        - math.lgamma(n + k * gamma0)
    )
    return block + allocation + prior.log_k_prior(k)


def log_collapsed_posterior(
    stats: SufficientStats, k: int, prior: PriorConfig, n: int
) -> float:
    """Unnormalized ``log π(z, K | y)`` of the collapsed model.

    Args:
        stats: Sufficient statistics of the state
        k: Number of blocks
        prior: Prior configuration
        n: Number of teams

    Returns:
        Log density up to an additive constant

    Raises:
        InvalidState: If ``k > k_max`` or the statistics do not match ``k`` and ``n``
    """
    if k > prior.k_max:
        msg = f'{k} blocks exceed k_max = {prior.k_max}'
        raise InvalidState(msg)
    stats.validate(k, n)
    if prior.is_unit:
        return log_collapsed_posterior_closed_form(stats, k, prior, n)
    return log_collapsed_posterior_general(stats, k, prior, n)
