"""Posterior summaries of relabelled traces: K probabilities, rosters and interactions."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
import pandas as pd
from scipy import stats as st

from blockleague.exceptions import InvalidInput
from blockleague.league import Outcome, points_table
from blockleague.model import BlockState, IndexedResults, SufficientStats, compute_stats
from blockleague.relabel import Permutation, RelabeledTrace

if TYPE_CHECKING:
    from collections.abc import Mapping

    from blockleague.league import ResultsMatrix
    from blockleague.types import AllocationSamples, FloatArray, JSONDict, LabelArray

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.5
LOWER_QUANTILE = 0.025
UPPER_QUANTILE = 0.975


@dataclass(frozen=True, eq=False)
class PosteriorSummary:
    """Posterior of K and of block memberships, with the strongest block at label 1.

    Attributes:
        teams: Team identifiers
        k_probs: ``k_probs[K - 1] = π(K | y)`` for ``K = 1..k_max``
        alloc_probs_given_k: For each K seen, an N×K array of ``π(z_i = l | y, K)``
        top_block_marginal: ``π(z_i = strongest | y)`` per team
        threshold: Marginal a team must exceed to join the roster
        n_samples: Number of samples (or states, for exact summaries) behind the estimates
    """

    teams: tuple[str, ...]
    k_probs: FloatArray = field(repr=False)
    alloc_probs_given_k: dict[int, FloatArray] = field(repr=False)
    top_block_marginal: FloatArray = field(repr=False)
    threshold: float = DEFAULT_THRESHOLD
    n_samples: int = 0

    @property
    def k_max(self) -> int:
        """Largest K covered by ``k_probs``."""
        return int(self.k_probs.size)

    @property
    def top_block_roster(self) -> tuple[str, ...]:
        """Teams whose strongest-block marginal exceeds the threshold."""
        return tuple(
            team
            for team, p in zip(self.teams, self.top_block_marginal, strict=True)
            if p > self.threshold
        )

    @property
    def top_block_size(self) -> int:
        """Number of teams in the roster."""
        return len(self.top_block_roster)

    @property
    def pi_k1(self) -> float:
        """``π(K = 1 | y)``."""
        return float(self.k_probs[0])

    def k_table(self) -> pd.DataFrame:
        """``K, probability, percent`` rows, percentages rounded to 2 decimals."""
        ks = np.arange(1, self.k_max + 1)
        return pd.DataFrame(
            {'k': ks, 'probability': self.k_probs, 'percent': np.round(100 * self.k_probs, 2)}
        )

    def allocation_table(self, k: int) -> pd.DataFrame:
        """Membership percentages given K, one row per team and one column per block."""
        if k not in self.alloc_probs_given_k:
            msg = f'no samples with K = {k}'
            raise InvalidInput(msg)
        probs = self.alloc_probs_given_k[k]
        frame = pd.DataFrame(
            np.round(100 * probs, 2), columns=[f'block_{b + 1}' for b in range(k)]
        )
        frame.insert(0, 'team', list(self.teams))
        return frame.sort_values(['block_1', 'team'], ascending=[False, True]).reset_index(
            drop=True
        )

    def marginal_frame(self) -> pd.DataFrame:
        """Teams with their strongest-block marginal, highest first."""
        frame = pd.DataFrame({'team': list(self.teams), 'marginal': self.top_block_marginal})
        return frame.sort_values(['marginal', 'team'], ascending=[False, True]).reset_index(
            drop=True
        )

    def to_dict(self) -> JSONDict:
        """JSON-ready form with full-precision probabilities and 1-based block labels."""
        return {
            'teams': list(self.teams),
            'n_samples': self.n_samples,
            'threshold': self.threshold,
            'k_probs': {str(k + 1): float(p) for k, p in enumerate(self.k_probs)},
            'alloc_probs_given_k': {
                str(k): {
                    team: [float(v) for v in row]
                    for team, row in zip(self.teams, probs, strict=True)
                }
                for k, probs in sorted(self.alloc_probs_given_k.items())
            },
            'top_block_marginal': {
                team: float(p)
                for team, p in zip(self.teams, self.top_block_marginal, strict=True)
            },
            'top_block_roster': list(self.top_block_roster),
            'top_block_size': self.top_block_size,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> PosteriorSummary:
        """Inverse of :meth:`to_dict`.

        Raises:
            InvalidInput: If a required key is missing
        """
        try:
            teams = tuple(data['teams'])
            k_probs = np.array(
                [data['k_probs'][str(k)] for k in range(1, len(data['k_probs']) + 1)]
            )
            alloc = {
                int(k): np.array([rows[team] for team in teams], dtype=np.float64)
                for k, rows in data['alloc_probs_given_k'].items()
            }
            marginal = np.array([data['top_block_marginal'][team] for team in teams])
        except KeyError as e:
            msg = f'summary is missing {e}'
            raise InvalidInput(msg) from e
        return cls(
            teams=teams,
            k_probs=k_probs,
            alloc_probs_given_k=alloc,
            top_block_marginal=marginal,
            threshold=float(data.get('threshold', DEFAULT_THRESHOLD)),
            n_samples=int(data.get('n_samples', 0)),
        )


@dataclass(frozen=True, eq=False)
class InteractionPosterior:
    """Dirichlet posterior of the outcome probabilities of every ordered block pair.

    All arrays have shape ``(k, k, 3)``: home block, away block, outcome.
    """

    k: int
    alpha: FloatArray = field(repr=False)
    mean: FloatArray = field(repr=False)
    sd: FloatArray = field(repr=False)
    lower: FloatArray = field(repr=False)
    upper: FloatArray = field(repr=False)

    def to_frame(self) -> pd.DataFrame:
        """Long form: one row per (home block, away block, outcome), blocks 1-based."""
        rows = []
        for kh in range(self.k):
            for ka in range(self.k):
                for w in range(3):
                    rows.append(
                        {
                            'home_block': kh + 1,
                            'away_block': ka + 1,
                            'outcome': Outcome(w + 1).letter,
                            'alpha': self.alpha[kh, ka, w],
                            'mean': self.mean[kh, ka, w],
                            'sd': self.sd[kh, ka, w],
                            'q025': self.lower[kh, ka, w],
                            'q975': self.upper[kh, ka, w],
                        }
                    )
        return pd.DataFrame(rows)

    def to_dict(self) -> JSONDict:
        """Nested ``[home][away][outcome]`` lists, blocks in strength order."""
        return {
            'k': self.k,
            'alpha': self.alpha.tolist(),
            'mean': self.mean.tolist(),
            'sd': self.sd.tolist(),
            'q025': self.lower.tolist(),
            'q975': self.upper.tolist(),
        }


def strength_order(stats: SufficientStats) -> list[int]:
    """Block labels from strongest to weakest.

    A block's score is its share of inter-block points (wins 1, draws ½) over its inter-block
    games, or ½ if it has none. Ties go to more within-block home wins, then to the lower
    label. Empty blocks come last.
    """
    counts = stats.counts
    k = counts.shape[0]
    inter = counts.copy()
    inter[np.arange(k), np.arange(k)] = 0
    home = inter.sum(axis=1)
    away = inter.sum(axis=0)
    wins = home[:, 0] + away[:, 2]
    draws = home[:, 1] + away[:, 1]
    games = home.sum(axis=1) + away.sum(axis=1)
    score = np.full(k, 0.5)
    played = games > 0
    score[played] = (wins[played] + 0.5 * draws[played]) / games[played]
    within_wins = counts[np.arange(k), np.arange(k), 0]
    return sorted(
        range(k),
        key=lambda j: (stats.sizes[j] == 0, -score[j], -within_wins[j], j),
    )


def identify_strongest(state: BlockState, stats: SufficientStats) -> Permutation:
    """Permutation sending the strongest block to label 1 and ordering the rest by strength."""
    if state.k == 1:
        return Permutation.identity(1)
    mapping = [0] * state.k
    for rank, label in enumerate(strength_order(stats)):
        mapping[label] = rank
    return Permutation(tuple(mapping))


def orient_trace(relabeled: RelabeledTrace, r: ResultsMatrix) -> RelabeledTrace:
    """Apply :func:`identify_strongest` to every sample, composing with its permutation."""
    index = IndexedResults(r)
    if index.n != len(relabeled.teams):
        msg = f'trace has {len(relabeled.teams)} teams, results have {index.n}'
        raise InvalidInput(msg)
    cache: dict[tuple[int, bytes], Permutation] = {}
    allocations = np.empty_like(relabeled.allocations)
    permutations = []
    for s in range(len(relabeled)):
        z = relabeled.allocations[s]
        k = int(relabeled.k[s])
        key = (k, z.tobytes())
        perm = cache.get(key)
        if perm is None:
            perm = identify_strongest(BlockState(z=z, k=k), index.stats(z, k))
            cache[key] = perm
        allocations[s] = perm.apply(z)
        permutations.append(perm.compose(relabeled.permutations[s]))
    logger.debug('oriented %d samples over %d distinct states', len(relabeled), len(cache))
    return dataclasses.replace(
        relabeled, allocations=allocations, permutations=tuple(permutations)
    )


def summarize(
    relabeled: AllocationSamples,
    threshold: float = DEFAULT_THRESHOLD,
    k_max: int | None = None,
) -> PosteriorSummary:
    """Posterior of K and of strongest-block membership from oriented samples.

    Label 1 (0 internally) must already denote the strongest block of each sample, see
    :func:`orient_trace`. The strongest-block marginal averages the per-K memberships over
    the posterior of K.

    Args:
        relabeled: Oriented samples
        threshold: Roster threshold on the marginal
        k_max: Length of ``k_probs``; defaults to the largest K in the trace

    Returns:
        Posterior summary

    Raises:
        InvalidInput: If the trace is empty or ``k_max`` is below a sampled K
    """
    allocations = np.asarray(relabeled.allocations)
    ks = np.asarray(relabeled.k)
    if ks.size == 0:
        msg = 'cannot summarize an empty trace'
        raise InvalidInput(msg)
    k_max = int(ks.max()) if k_max is None else k_max
    if ks.max() > k_max:
        msg = f'trace holds K = {ks.max()} above k_max = {k_max}'
        raise InvalidInput(msg)

    k_counts = np.bincount(ks, minlength=k_max + 1)[1:]
    k_probs = k_counts / ks.size
    alloc: dict[int, FloatArray] = {}
    marginal = np.zeros(allocations.shape[1])
    for k in np.flatnonzero(k_counts) + 1:
        rows = allocations[ks == k]
        probs = np.stack([(rows == label).mean(axis=0) for label in range(k)], axis=1)
        alloc[int(k)] = probs
        marginal += probs[:, 0] * k_probs[k - 1]

    return PosteriorSummary(
        teams=tuple(relabeled.teams),
        k_probs=k_probs,
        alloc_probs_given_k=alloc,
        top_block_marginal=marginal,
        threshold=threshold,
        n_samples=int(ks.size),
    )


def interaction_posterior(
    r: ResultsMatrix,
    z: LabelArray,
    k: int,
    beta: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> InteractionPosterior:
    """Dirichlet(N_kl + β) posterior of each block pair's outcome probabilities.

    Quantiles come from the Beta marginals of the Dirichlet.
    """
    counts = compute_stats(r, BlockState(z=z, k=k)).counts
    alpha = counts + np.asarray(beta, dtype=np.float64)
    total = alpha.sum(axis=-1, keepdims=True)
    rest = total - alpha
    mean = alpha / total
    sd = np.sqrt(alpha * rest / (total**2 * (total + 1.0)))
    return InteractionPosterior(
        k=k,
        alpha=alpha,
        mean=mean,
        sd=sd,
        lower=st.beta.ppf(LOWER_QUANTILE, alpha, rest),
        upper=st.beta.ppf(UPPER_QUANTILE, alpha, rest),
    )


def map_allocation(trace: AllocationSamples, k: int) -> BlockState:
    """Most frequent allocation among the samples with ``k`` blocks.

    Ties go to the lexicographically smallest allocation.

    Raises:
        InvalidInput: If no sample has ``k`` blocks
    """
    ks = np.asarray(trace.k)
    rows = np.asarray(trace.allocations)[ks == k]
    if rows.shape[0] == 0:
        msg = f'no samples with K = {k}'
        raise InvalidInput(msg)
    unique, counts = np.unique(rows, axis=0, return_counts=True)
    return BlockState(z=unique[int(np.argmax(counts))], k=k)


def top_block_size_series(summaries: Mapping[str, PosteriorSummary]) -> pd.Series:
    """Strongest-block roster size per season."""
    return pd.Series(
        {season: summary.top_block_size for season, summary in summaries.items()},
        name='top_block_size',
        dtype='int64',
    ).rename_axis('season')


def roster_table(summaries: Mapping[str, PosteriorSummary]) -> pd.DataFrame:
    """Team × season table of strongest-block marginals (empty where a team is absent)."""
    columns = {
        season: pd.Series(summary.top_block_marginal, index=list(summary.teams))
        for season, summary in summaries.items()
    }
    frame = pd.DataFrame(columns).rename_axis('team')
    return frame.sort_index()


def ordered_results_grid(r: ResultsMatrix, z: LabelArray) -> pd.DataFrame:
    """Results grid with teams grouped by block, then sorted by points within a block.

    A leading ``block`` column holds each row team's 1-based block.
    """
    z = np.asarray(z, dtype=np.int64)
    if z.size != r.n_teams:
        msg = f'allocation vector has {z.size} entries for {r.n_teams} teams'
        raise InvalidInput(msg)
    points = points_table(r).points
    names = np.asarray(r.teams)
    order = np.lexsort((names, -points, z))
    grid = r.permuted(order).to_matrix_frame()
    grid.insert(0, 'block', z[order] + 1)
    return grid.rename_axis('team')
