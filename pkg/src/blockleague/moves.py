"""Move types of the trans-dimensional sampler: MK, M-GS and AE."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Any

import numpy as np

from blockleague.base import BaseMove, ChainState, bind
from blockleague.exceptions import ConfigurationError, InvalidState
from blockleague.model import N_OUTCOMES, SufficientStats
from blockleague.utils import accept, log_beta_split

if TYPE_CHECKING:
    from blockleague.league import ResultsMatrix
    from blockleague.model import BlockState, IndexedResults, PriorConfig
    from blockleague.types import CountArray, LabelArray


class InsertDeleteMove(BaseMove):
    """MK: insert an empty block at the top label, or delete the top block if it is empty.

    ``z`` never changes. Insertions are accepted with the prior-ratio of the allocation
    prior and the K prior; deletions use the reciprocal ratio, which is always at least 1.
    """

    kinds = ('insert', 'delete')

    def log_insert_ratio(self, k: int) -> float:
        """``log π(z, k+1 | y) - log π(z, k | y)`` for an empty block added to ``k`` blocks."""
        gamma0 = self.prior.gamma0
        allocation = (
            math.lgamma((k + 1) * gamma0)
            - math.lgamma(k * gamma0)
            - math.lgamma(self.n + (k + 1) * gamma0)
            + math.lgamma(self.n + k * gamma0)
        )
        return allocation + self.prior.log_k_prior(k + 1) - self.prior.log_k_prior(k)

    def insert_acceptance(self, k: int) -> float:
        """Acceptance ratio of an insertion from ``k`` blocks (before capping at 1)."""
        return math.exp(self.log_insert_ratio(k))

    def delete_acceptance(self, k: int) -> float:
        """Acceptance ratio of deleting an empty block from ``k`` blocks."""
        return math.exp(-self.log_insert_ratio(k - 1))

    def step(self, chain: ChainState, rng: np.random.Generator) -> bool:
        """Propose an insertion or a deletion with probability one half each."""
        if rng.random() < 0.5:
            if chain.k >= self.prior.k_max:
                return self._record('insert', False)
            if not accept(self.log_insert_ratio(chain.k), rng):
                return self._record('insert', False)
            _grow(chain)
            return self._record('insert', True)

        if chain.k == 1 or chain.stats.sizes[chain.k - 1] != 0:
            return self._record('delete', False)
        if not accept(-self.log_insert_ratio(chain.k - 1), rng):
            return self._record('delete', False)
        _shrink(chain)
        return self._record('delete', True)


class GibbsSweepMove(BaseMove):
    """M-GS: Metropolis-within-Gibbs sweep over ``z_1 .. z_N`` at fixed K.

    Each site proposes a label uniformly among the other ``K - 1`` labels (empty ones
    included). The block factor of the current counts is carried through the sweep, so each
    proposal evaluates the table only for the proposed counts.
    """

    kinds = ('gibbs',)

    def _propose(
        self, chain: ChainState, i: int, k1: int, current: float
    ) -> tuple[float, CountArray, float]:
        k0 = int(chain.z[i])
        proposed = self.index.move_counts(chain.stats.counts, chain.z, i, k0, k1)
        proposed_terms = self._block_terms(proposed)
        sizes = chain.stats.sizes
        gamma0 = self.prior.gamma0
        # reduces to (n_k1 + 1) / n_k0 for gamma0 = 1
        allocation = math.log(sizes[k1] + gamma0) - math.log(sizes[k0] - 1 + gamma0)
        return proposed_terms - current + allocation, proposed, proposed_terms

    def log_ratio(self, chain: ChainState, i: int, k1: int) -> tuple[float, CountArray]:
        """Log posterior ratio of moving team ``i`` to ``k1`` and the proposed counts.

        Returns:
            ``(log_ratio, proposed_counts)``
        """
        current = self._block_terms(chain.stats.counts)
        log_alpha, proposed, _ = self._propose(chain, i, k1, current)
        return log_alpha, proposed

    def step(self, chain: ChainState, rng: np.random.Generator) -> bool:
        """Sweep every team once; returns True if any label changed."""
        k = chain.k
        if k == 1:
            return False
        current = self._block_terms(chain.stats.counts)
        offsets = rng.integers(k - 1, size=chain.n)
        moved = False
        for i in range(chain.n):
            k0 = int(chain.z[i])
            k1 = int(offsets[i])
            if k1 >= k0:
                k1 += 1
            log_alpha, proposed, proposed_terms = self._propose(chain, i, k1, current)
            if self._record('gibbs', accept(log_alpha, rng)):
                chain.stats.counts = proposed
                chain.stats.sizes[k0] -= 1
                chain.stats.sizes[k1] += 1
                chain.z[i] = k1
                current = proposed_terms
                moved = True
        return moved


class AbsorbEjectMove(BaseMove):
    """AE: eject part of a block into a new block, or absorb one block into another.

    The ejected fraction ``p_E ~ Beta(a, a)`` is integrated out of the proposal. After an
    ejection the new top label is swapped with a uniformly drawn label; an absorption moves
    the top block into the freed label, which undoes that swap. Acceptance uses the total
    probability of proposing the new state over all the ways the move can reach it.
    """

    kinds = ('eject', 'absorb')

    def __init__(
        self,
        prior: PriorConfig,
        index: IndexedResults | None = None,
        ejection_concentration: float = 1.0,
        **kwargs: Any,
    ) -> None:
        """Initialize absorb/eject move.

        Args:
            prior: Prior configuration of the model
            index: Indexed results of the season being sampled
            ejection_concentration: ``a`` of the Beta(a, a) ejection fraction
            **kwargs: Base class parameters
        """
        self.ejection_concentration = ejection_concentration
        self._pair_cache: dict[int, tuple[LabelArray, LabelArray]] = {}
        super().__init__(prior, index, **kwargs)

    def _validate_config(self) -> None:
        if self.ejection_concentration <= 0:
            msg = 'ejection_concentration must be positive'
            raise ConfigurationError(msg)

    def eject_probability(self, k: int) -> float:
        """Probability ``p_K^e`` of attempting an ejection from ``k`` blocks."""
        if k >= self.prior.k_max:
            return 0.0
        if k == 1:
            return 1.0
        return 0.5

    def ejection_count_factor(self, k: int, n_stay: int, n_move: int) -> float:
        """``(1 - p^e_{K+1}) / p^e_K · (n_j1 + n_j2 + 1)`` for an ejection from ``k`` blocks.

        This is the proposal ratio for the *sizes* of the two blocks. When no block is empty
        before or after the move, it times ``C(n_j1 + n_j2, n_j2)`` equals the ratio of
        :meth:`log_absorption_probability` to :meth:`log_ejection_probability`.
        """
        return (1.0 - self.eject_probability(k + 1)) / self.eject_probability(k) * (
            n_stay + n_move + 1
        )

    def log_ejection_probability(self, z: LabelArray, k: int, z_new: LabelArray) -> float:
        """Log probability that an attempt at ``(z, k)`` ejects into ``z_new`` (``k + 1`` labels).

        Sums over every (ejecting block, ejected subset, swap label) that yields ``z_new``; with
        empty blocks or an empty ejected set several of them coincide.
        """
        a = self.ejection_concentration
        labels = np.arange(k + 1)[:, None]
        # undo each candidate swap of the new top label
        unswapped = np.where(z_new == labels, k, np.where(z_new == k, labels, z_new))
        ejected = unswapped == k
        valid = (ejected | (unswapped == z)).all(axis=1)
        n_ejected = ejected.sum(axis=1)
        lowest = np.where(ejected, z, k).min(axis=1)
        highest = np.where(ejected, z, -1).max(axis=1)
        sizes = np.bincount(z, minlength=k)

        terms: list[float] = []
        for r in np.flatnonzero(valid):
            if n_ejected[r] == 0:
                terms.extend(log_beta_split(int(n), 0, a) for n in sizes)
            elif lowest[r] == highest[r]:
                n_move = int(n_ejected[r])
                terms.append(log_beta_split(int(sizes[lowest[r]]) - n_move, n_move, a))
        if not terms:
            return -math.inf
        return (
            math.log(self.eject_probability(k))
            - math.log(k)
            - math.log(k + 1)
            + float(np.logaddexp.reduce(terms))
        )

    def log_absorption_probability(self, z: LabelArray, k: int, z_new: LabelArray) -> float:
        """Log probability that an attempt at ``(z, k)`` absorbs into ``z_new`` (``k - 1`` labels).

        Counts the ordered block pairs whose merge, followed by moving the top block into the
        freed label, yields ``z_new``.
        """
        first, second = self._pairs(k)
        top = k - 1
        merged = np.where(z == second, first, z)
        merged = np.where((merged == top) & (second != top), second, merged)
        count = int((merged == z_new).all(axis=1).sum())
        if count == 0:
            return -math.inf
        return (
            math.log(count)
            + math.log(1.0 - self.eject_probability(k))
            - math.log(k)
            - math.log(k - 1)
        )

    def _pairs(self, k: int) -> tuple[LabelArray, LabelArray]:
        pairs = self._pair_cache.get(k)
        if pairs is None:
            first, second = np.nonzero(~np.eye(k, dtype=bool))
            pairs = (first[:, None], second[:, None])
            self._pair_cache[k] = pairs
        return pairs

    def step(self, chain: ChainState, rng: np.random.Generator) -> bool:
        """Attempt an ejection with probability ``p_K^e``, otherwise an absorption."""
        if rng.random() < self.eject_probability(chain.k):
            return self._eject(chain, rng)
        return self._absorb(chain, rng)

    def _eject(self, chain: ChainState, rng: np.random.Generator) -> bool:
        k = chain.k
        a = self.ejection_concentration
        j1 = int(rng.integers(k))
        members = np.flatnonzero(chain.z == j1)
        fraction = rng.beta(a, a)
        ejected = members[rng.random(members.size) < fraction]

        z_new = chain.z.copy()
        z_new[ejected] = k
        swap_with = int(rng.integers(k + 1))
        if swap_with != k:
            at_swap = z_new == swap_with
            at_top = z_new == k
            z_new[at_swap] = k
            z_new[at_top] = swap_with

        stats_new = self.index.stats(z_new, k + 1)
        log_alpha = (
            self._log_posterior(stats_new, k + 1)
            - self._log_posterior(chain.stats, k)
            + self.log_absorption_probability(z_new, k + 1, chain.z)
            - self.log_ejection_probability(chain.z, k, z_new)
        )
        if not accept(log_alpha, rng):
            return self._record('eject', False)
        chain.z[:] = z_new
        chain.k = k + 1
        chain.stats = stats_new
        return self._record('eject', True)

    def _absorb(self, chain: ChainState, rng: np.random.Generator) -> bool:
        k = chain.k
        if k < 2:
            return self._record('absorb', False)
        j1 = int(rng.integers(k))
        j2 = int(rng.integers(k - 1))
        if j2 >= j1:
            j2 += 1

        z_new = chain.z.copy()
        z_new[z_new == j2] = j1
        top = k - 1
        if j2 != top:
            z_new[z_new == top] = j2

        stats_new = self.index.stats(z_new, k - 1)
        log_alpha = (
            self._log_posterior(stats_new, k - 1)
            - self._log_posterior(chain.stats, k)
            + self.log_ejection_probability(z_new, k - 1, chain.z)
            - self.log_absorption_probability(chain.z, k, z_new)
        )
        if not accept(log_alpha, rng):
            return self._record('absorb', False)
        chain.z[:] = z_new
        chain.k = k - 1
        chain.stats = stats_new
        return self._record('absorb', True)


def _grow(chain: ChainState) -> None:
    k = chain.k
    counts = np.zeros((k + 1, k + 1, N_OUTCOMES), dtype=np.int64)
    counts[:k, :k] = chain.stats.counts
    sizes = np.append(chain.stats.sizes, 0).astype(np.int64)
    chain.stats = SufficientStats(counts=counts, sizes=sizes)
    chain.k = k + 1


def _shrink(chain: ChainState) -> None:
    k = chain.k
    if chain.stats.sizes[k - 1] != 0:
        msg = 'only an empty top block can be removed'
        raise InvalidState(msg)
    chain.stats = SufficientStats(
        counts=chain.stats.counts[: k - 1, : k - 1].copy(),
        sizes=chain.stats.sizes[: k - 1].copy(),
    )
    chain.k = k - 1


def move_mk(
    state: BlockState,
    stats: SufficientStats,
    prior: PriorConfig,
    rng: np.random.Generator,
) -> tuple[BlockState, bool]:
    """One MK attempt; ``stats`` is updated in place to match the returned state.

    Returns:
        ``(new_state, accepted)``
    """
    move, chain = bind(InsertDeleteMove, state, stats, None, prior)
    accepted = move.step(chain, rng)
    _write_back(chain, stats)
    return chain.snapshot(), accepted


def move_gibbs_sweep(
    state: BlockState,
    stats: SufficientStats,
    r: ResultsMatrix | IndexedResults,
    prior: PriorConfig,
    rng: np.random.Generator,
) -> BlockState:
    """One M-GS sweep; ``stats`` is updated in place to match the returned state."""
    move, chain = bind(GibbsSweepMove, state, stats, r, prior)
    move.step(chain, rng)
    _write_back(chain, stats)
    return chain.snapshot()


def move_absorb_eject(
    state: BlockState,
    stats: SufficientStats,
    r: ResultsMatrix | IndexedResults,
    prior: PriorConfig,
    rng: np.random.Generator,
) -> tuple[BlockState, int, bool]:
    """One AE attempt; ``stats`` is updated in place to match the returned state.

    Returns:
        ``(new_state, new_k, accepted)``
    """
    move, chain = bind(AbsorbEjectMove, state, stats, r, prior)
    accepted = move.step(chain, rng)
    _write_back(chain, stats)
    return chain.snapshot(), chain.k, accepted


def _write_back(chain: ChainState, stats: SufficientStats) -> None:
    if chain.stats is not stats:
        stats.counts = chain.stats.counts
        stats.sizes = chain.stats.sizes
