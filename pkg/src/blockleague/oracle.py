"""Exact posterior by brute-force enumeration of every (z, K), for checking the sampler."""

from __future__ import annotations

import itertools
import logging
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import logsumexp

from blockleague.exceptions import TooLarge
from blockleague.model import BlockState, IndexedResults, log_collapsed_posterior
from blockleague.posterior import DEFAULT_THRESHOLD, PosteriorSummary, identify_strongest

if TYPE_CHECKING:
    from collections.abc import Iterator

    from blockleague.league import ResultsMatrix
    from blockleague.model import PriorConfig
    from blockleague.types import FloatArray

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**7


def enumeration_size(n: int, k_max: int) -> int:
    """Number of labelled states ``Σ_{K=1}^{k_max} K^n``."""
    return sum(k**n for k in range(1, k_max + 1))


def enumerate_states(n: int, k_max: int) -> Iterator[BlockState]:
    """Every labelled ``(z, K)`` with ``K ≤ k_max``, K ascending, z in lexicographic order."""
    for k in range(1, k_max + 1):
        for z in itertools.product(range(k), repeat=n):
            yield BlockState(z=np.array(z, dtype=np.int64), k=k)


def exact_state_distribution(
    r: ResultsMatrix, prior: PriorConfig, budget: int = DEFAULT_BUDGET
) -> tuple[list[BlockState], FloatArray]:
    """Normalized ``π(z, K | y)`` over every labelled state.

    Returns:
        ``(states, probabilities)`` in :func:`enumerate_states` order

    Raises:
        TooLarge: If the number of states exceeds ``budget``
    """
    index = IndexedResults(r)
    count = enumeration_size(index.n, prior.k_max)
    if count > budget:
        raise TooLarge(count, budget)
    logger.debug('enumerating %d states', count)

    states = list(enumerate_states(index.n, prior.k_max))
    log_post = np.array(
        [
            log_collapsed_posterior(index.stats(s.z, s.k), s.k, prior, index.n)
            for s in states
        ]
    )
    return states, np.exp(log_post - logsumexp(log_post))


def exact_posterior_oracle(
    r: ResultsMatrix,
    prior: PriorConfig,
    threshold: float = DEFAULT_THRESHOLD,
    budget: int = DEFAULT_BUDGET,
) -> PosteriorSummary:
    """Exact posterior summary, with the strongest block identified state by state.

    Args:
        r: Season results (small)
        prior: Prior configuration; ``k_max`` bounds the enumeration
        threshold: Roster threshold on the strongest-block marginal
        budget: Largest number of states to enumerate

    Returns:
        Summary in the same form the sampler path produces

    Raises:
        TooLarge: If the number of states exceeds ``budget``
    """
    index = IndexedResults(r)
    states, probs = exact_state_distribution(r, prior, budget)

    k_probs = np.zeros(prior.k_max)
    alloc = {k: np.zeros((index.n, k)) for k in range(1, prior.k_max + 1)}
    teams = np.arange(index.n)
    for state, p in zip(states, probs, strict=True):
        perm = identify_strongest(state, index.stats(state.z, state.k))
        k_probs[state.k - 1] += p
        alloc[state.k][teams, perm.apply(state.z)] += p

    marginal = np.zeros(index.n)
    for k, weights in alloc.items():
        marginal += weights[:, 0]
        if k_probs[k - 1] > 0:
            weights /= k_probs[k - 1]

    return PosteriorSummary(
        teams=r.teams,
        k_probs=k_probs,
        alloc_probs_given_k={k: w for k, w in alloc.items() if k_probs[k - 1] > 0},
        top_block_marginal=marginal,
        threshold=threshold,
        n_samples=len(states),
    )
