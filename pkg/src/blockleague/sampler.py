"""Sampler configuration, the run loop over the three move types, and the trace it records."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
from tqdm import tqdm

from blockleague.base import BaseMove, ChainState
from blockleague.exceptions import ConfigurationError, InvalidInput, ParseError
from blockleague.model import BlockState, IndexedResults
from blockleague.moves import AbsorbEjectMove, GibbsSweepMove, InsertDeleteMove

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence

    from blockleague.league import ResultsMatrix
    from blockleague.model import PriorConfig
    from blockleague.types import FloatArray, LabelArray

logger = logging.getLogger(__name__)

MOVE_NAMES = ('mk', 'gibbs', 'ae')
TRACE_MAGIC = '# blockleague trace'


@dataclass(frozen=True)
class SamplerConfig:
    """Run-length, seeding and move-selection settings of the sampler.

    Attributes:
        iterations: Total number of iterations S, burn-in included
        burn_in: Leading iterations discarded
        rng_seed: Seed of the chain's ``SeedSequence``
        move_probabilities: Selection probabilities of (MK, M-GS, AE)
        thinning: Keep every ``thinning``-th post-burn-in state
        chains: Number of independent chains pooled into one trace
        progress: Show a tqdm progress bar
    """

    iterations: int = 200_000
    burn_in: int = 50_000
    rng_seed: int = 1
    move_probabilities: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    thinning: int = 1
    chains: int = 1
    progress: bool = False

    def __post_init__(self) -> None:
        if self.iterations < 1:
            msg = 'iterations must be at least 1'
            raise ConfigurationError(msg)
        if not 0 <= self.burn_in < self.iterations:
            msg = f'burn_in must lie in 0..{self.iterations - 1}, got {self.burn_in}'
            raise ConfigurationError(msg)
        if not 0 <= self.rng_seed < 2**64:
            msg = 'rng_seed must be a non-negative 64-bit integer'
            raise ConfigurationError(msg)
        probs = tuple(float(p) for p in self.move_probabilities)
        if len(probs) != len(MOVE_NAMES) or any(p < 0 for p in probs):
            msg = 'move_probabilities must hold three non-negative values'
            raise ConfigurationError(msg)
        if not math.isclose(sum(probs), 1.0, abs_tol=1e-9):
            msg = f'move_probabilities must sum to 1, got {sum(probs)}'
            raise ConfigurationError(msg)
        object.__setattr__(self, 'move_probabilities', probs)
        if self.thinning < 1:
            msg = 'thinning must be at least 1'
            raise ConfigurationError(msg)
        if self.chains < 1:
            msg = 'chains must be at least 1'
            raise ConfigurationError(msg)

    @property
    def n_kept(self) -> int:
        """Number of states each chain records."""
        return (self.iterations - self.burn_in) // self.thinning

    def chain_seeds(self) -> list[np.random.SeedSequence]:
        """One child ``SeedSequence`` per chain, spawned from ``rng_seed``."""
        return np.random.SeedSequence(self.rng_seed).spawn(self.chains)


@dataclass(frozen=True, eq=False)
class Trace:
    """Post-burn-in samples of ``(z, K)`` from one or more chains.

    ``allocations`` holds 0-based labels, one row per kept sample. ``acceptance`` pools the
    counters of all chains; ``chain_acceptance`` keeps them per chain.
    """

    teams: tuple[str, ...]
    allocations: LabelArray = field(repr=False)
    k: LabelArray = field(repr=False)
    iterations: LabelArray = field(repr=False)
    chain: LabelArray = field(repr=False)
    rng_seed: int = 1
    acceptance: dict[str, dict[str, float]] = field(default_factory=dict)
    chain_acceptance: tuple[dict[str, dict[str, float]], ...] = ()

    def __post_init__(self) -> None:
        allocations = np.asarray(self.allocations, dtype=np.int64)
        if allocations.ndim != 2 or allocations.shape[1] != len(self.teams):
            msg = 'allocations must have one column per team'
            raise InvalidInput(msg)
        n_samples = allocations.shape[0]
        arrays = {'allocations': allocations}
        for name in ('k', 'iterations', 'chain'):
            values = np.asarray(getattr(self, name), dtype=np.int64)
            if values.shape != (n_samples,):
                msg = f'{name} must have one entry per sample'
                raise InvalidInput(msg)
            arrays[name] = values
        if n_samples and (
            (allocations < 0).any() or (allocations >= arrays['k'][:, None]).any()
        ):
            msg = 'every stored label must lie below its sample K'
            raise InvalidInput(msg)
        for name, values in arrays.items():
            values.setflags(write=False)
            object.__setattr__(self, name, values)

    def __len__(self) -> int:
        return int(self.k.size)

    @property
    def n_teams(self) -> int:
        """Number of teams."""
        return len(self.teams)

    def state(self, s: int) -> BlockState:
        """Sample ``s`` as a block state."""
        return BlockState(z=self.allocations[s], k=int(self.k[s]))

    def states(self) -> Iterator[BlockState]:
        """Iterate over the samples as block states."""
        for s in range(len(self)):
            yield self.state(s)

    def k_frequencies(self, k_max: int) -> FloatArray:
        """Empirical distribution of K over ``1..k_max``."""
        counts = np.bincount(self.k, minlength=k_max + 1)[1 : k_max + 1]
        return counts / max(len(self), 1)

    def to_frame(self) -> pd.DataFrame:
        """One row per sample with 1-based, space-separated labels."""
        z = [' '.join(map(str, row + 1)) for row in self.allocations]
        return pd.DataFrame(
            {'iteration': self.iterations, 'chain': self.chain + 1, 'k': self.k, 'z': z}
        )

    def to_csv(self, path: str | Path, manifest_hash: str | None = None) -> None:
        """Write the trace file: comment header (teams, seed) then ``iteration,chain,k,z`` rows."""
        path = Path(path)
        header = [
            TRACE_MAGIC,
            f'# teams: {json.dumps(list(self.teams), ensure_ascii=False)}',
            f'# rng_seed: {self.rng_seed}',
        ]
        if manifest_hash is not None:
            header.append(f'# manifest: {manifest_hash}')
        with path.open('w', encoding='utf-8', newline='') as fh:
            fh.write('\n'.join(header) + '\n')
            self.to_frame().to_csv(fh, index=False, lineterminator='\n')

    @classmethod
    def from_csv(cls, path: str | Path) -> Trace:
        """Read a trace file written by :meth:`to_csv`.

        Raises:
            ParseError: If the header or a row is malformed
        """
        path = Path(path)
        with path.open(encoding='utf-8') as fh:
            meta: dict[str, str] = {}
            n_header = 0
            for line in fh:
                if not line.startswith('#'):
                    break
                n_header += 1
                key, sep, value = line[1:].partition(':')
                if sep:
                    meta[key.strip()] = value.strip()
        if 'teams' not in meta:
            msg = f'{path} is not a trace file (no teams header)'
            raise ParseError(msg)
        try:
            teams = tuple(json.loads(meta['teams']))
            rng_seed = int(meta.get('rng_seed', '1'))
        except ValueError as e:
            msg = f'bad trace header in {path}: {e}'
            raise ParseError(msg) from e

        frame = pd.read_csv(path, skiprows=n_header, dtype={'z': str})
        missing = {'iteration', 'chain', 'k', 'z'} - set(frame.columns)
        if missing:
            msg = f'trace columns missing: {sorted(missing)}'
            raise ParseError(msg)
        rows = []
        for row_number, labels in enumerate(frame['z'], start=1):
            try:
                rows.append([int(v) - 1 for v in str(labels).split()])
            except ValueError as e:
                raise ParseError(str(e), row=row_number) from e
            if len(rows[-1]) != len(teams):
                msg = f'{len(rows[-1])} labels for {len(teams)} teams'
                raise ParseError(msg, row=row_number)
        allocations = np.array(rows, dtype=np.int64).reshape(len(rows), len(teams))
        return cls(
            teams=teams,
            allocations=allocations,
            k=frame['k'].to_numpy(dtype=np.int64),
            iterations=frame['iteration'].to_numpy(dtype=np.int64),
            chain=frame['chain'].to_numpy(dtype=np.int64) - 1,
            rng_seed=rng_seed,
        )


def concatenate(traces: Sequence[Trace]) -> Trace:
    """Pool traces of the same season; acceptance counters are summed.

    Raises:
        InvalidInput: If no traces are given or their teams differ
    """
    if not traces:
        msg = 'nothing to concatenate'
        raise InvalidInput(msg)
    teams = traces[0].teams
    if any(t.teams != teams for t in traces):
        msg = 'traces cover different teams'
        raise InvalidInput(msg)
    per_chain = tuple(acc for t in traces for acc in (t.chain_acceptance or (t.acceptance,)))
    return Trace(
        teams=teams,
        allocations=np.concatenate([t.allocations for t in traces]),
        k=np.concatenate([t.k for t in traces]),
        iterations=np.concatenate([t.iterations for t in traces]),
        chain=np.concatenate([t.chain for t in traces]),
        rng_seed=traces[0].rng_seed,
        acceptance=_pool_acceptance(per_chain),
        chain_acceptance=per_chain,
    )


def _pool_acceptance(
    per_chain: Sequence[dict[str, dict[str, float]]],
) -> dict[str, dict[str, float]]:
    pooled: dict[str, dict[str, float]] = {}
    for acceptance in per_chain:
        for kind, counters in acceptance.items():
            entry = pooled.setdefault(kind, {'attempts': 0, 'accepts': 0, 'rate': 0.0})
            entry['attempts'] += counters['attempts']
            entry['accepts'] += counters['accepts']
    for entry in pooled.values():
        entry['rate'] = entry['accepts'] / entry['attempts'] if entry['attempts'] else 0.0
    return pooled


def build_moves(prior: PriorConfig, index: IndexedResults) -> tuple[BaseMove, ...]:
    """The (MK, M-GS, AE) move objects for one chain."""
    return (
        InsertDeleteMove(prior, index),
        GibbsSweepMove(prior, index),
        AbsorbEjectMove(prior, index),
    )


def run_chain(
    index: IndexedResults,
    prior: PriorConfig,
    cfg: SamplerConfig,
    seed: np.random.SeedSequence,
    chain_id: int = 0,
) -> Trace:
    """Run one chain from the single-block state and record its kept samples.

    Each iteration draws one uniform to pick the move type, then attempts that move.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    moves = build_moves(prior, index)
    cumulative = np.cumsum(cfg.move_probabilities)
    last = len(moves) - 1

    start = BlockState.single_block(index.n)
    chain = ChainState.start(start, index.stats(start.z, start.k))

    n_kept = cfg.n_kept
    allocations = np.empty((n_kept, index.n), dtype=np.int64)
    ks = np.empty(n_kept, dtype=np.int64)
    kept_at = np.empty(n_kept, dtype=np.int64)
    kept = 0

    for s in tqdm(
        range(1, cfg.iterations + 1),
        desc=f'chain {chain_id + 1}',
        disable=not cfg.progress,
        leave=False,
    ):
        choice = min(int(np.searchsorted(cumulative, rng.random(), side='right')), last)
        moves[choice].step(chain, rng)
        if s > cfg.burn_in and (s - cfg.burn_in) % cfg.thinning == 0 and kept < n_kept:
            allocations[kept] = chain.z
            ks[kept] = chain.k
            kept_at[kept] = s
            kept += 1

    acceptance: dict[str, dict[str, float]] = {}
    for move in moves:
        acceptance.update(move.get_acceptance_stats())
    logger.info(
        'chain %d finished: %s',
        chain_id + 1,
        ', '.join(f'{kind} {c["rate"]:.3f}' for kind, c in acceptance.items()),
    )
    return Trace(
        teams=index.results.teams,
        allocations=allocations,
        k=ks,
        iterations=kept_at,
        chain=np.full(n_kept, chain_id, dtype=np.int64),
        rng_seed=cfg.rng_seed,
        acceptance=acceptance,
        chain_acceptance=(acceptance,),
    )


def run_sampler(r: ResultsMatrix, prior: PriorConfig, cfg: SamplerConfig) -> Trace:
    """Sample ``π(z, K | y)`` and return the pooled post-burn-in trace.

    Chains start with every team in one block and use the child seeds of
    ``SeedSequence(cfg.rng_seed)``, so the output depends only on the inputs and the seed.

    Args:
        r: Season results
        prior: Prior configuration
        cfg: Sampler configuration

    Returns:
        Trace of every chain's kept samples, chain by chain
    """
    index = IndexedResults(r)
    logger.info(
        'sampling %d teams: %d iterations, burn-in %d, %d chain(s), seed %d',
        index.n,
        cfg.iterations,
        cfg.burn_in,
        cfg.chains,
        cfg.rng_seed,
    )
    traces = [
        run_chain(index, prior, cfg, seed, chain_id)
        for chain_id, seed in enumerate(cfg.chain_seeds())
    ]
    return traces[0] if len(traces) == 1 else concatenate(traces)
