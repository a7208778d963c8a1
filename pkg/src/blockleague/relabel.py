"""Online relabelling of sampled allocation vectors to undo label switching.

Samples are visited in order of increasing number of non-empty blocks. Each is relabelled by
the permutation minimising its summed Hamming distance to every sample relabelled before it.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import linear_sum_assignment

from blockleague.exceptions import InvalidInput

if TYPE_CHECKING:
    from collections.abc import Sequence

    from blockleague.types import AllocationSamples, FloatArray, LabelArray

logger = logging.getLogger(__name__)

#: largest K whose permutations are searched exhaustively
EXHAUSTIVE_MAX_K = 4


@dataclass(frozen=True)
class Permutation:
    """Bijection on block labels ``0..k-1``: label ``j`` becomes ``mapping[j]``."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        mapping = tuple(int(j) for j in self.mapping)
        if sorted(mapping) != list(range(len(mapping))):
            msg = f'{mapping} is not a permutation of 0..{len(mapping) - 1}'
            raise InvalidInput(msg)
        object.__setattr__(self, 'mapping', mapping)

    @classmethod
    def identity(cls, k: int) -> Permutation:
        """Identity on ``k`` labels."""
        return cls(tuple(range(k)))

    def __len__(self) -> int:
        return len(self.mapping)

    @property
    def is_identity(self) -> bool:
        """True if every label maps to itself."""
        return self.mapping == tuple(range(len(self.mapping)))

    def apply(self, z: LabelArray) -> LabelArray:
        """Relabel an allocation vector."""
        return np.asarray(self.mapping, dtype=np.int64)[np.asarray(z, dtype=np.int64)]

    def compose(self, first: Permutation) -> Permutation:
        """Permutation applying ``first`` and then ``self``."""
        if len(first) != len(self):
            msg = 'cannot compose permutations of different sizes'
            raise InvalidInput(msg)
        return Permutation(tuple(self.mapping[j] for j in first.mapping))

    def inverse(self) -> Permutation:
        """Inverse permutation."""
        inverse = [0] * len(self.mapping)
        for j, image in enumerate(self.mapping):
            inverse[image] = j
        return Permutation(tuple(inverse))


@dataclass(frozen=True, eq=False)
class RelabeledTrace:
    """Relabelled allocation vectors in the original sample order.

    ``permutations[s]`` maps sample ``s`` of the source trace onto ``allocations[s]``;
    ``order`` lists source positions in the order they were processed.
    """

    teams: tuple[str, ...]
    allocations: LabelArray = field(repr=False)
    k: LabelArray = field(repr=False)
    iterations: LabelArray = field(repr=False)
    permutations: tuple[Permutation, ...] = field(repr=False)
    order: LabelArray = field(repr=False)

    def __post_init__(self) -> None:
        for name in ('allocations', 'k', 'iterations', 'order'):
            values = np.array(getattr(self, name), dtype=np.int64)
            values.setflags(write=False)
            object.__setattr__(self, name, values)
        if len(self.permutations) != self.k.size:
            msg = 'one permutation per sample is required'
            raise InvalidInput(msg)

    def __len__(self) -> int:
        return int(self.k.size)


def allocation_distance(z: LabelArray, z_other: LabelArray) -> int:
    """Number of teams whose labels differ between two allocation vectors.

    Raises:
        InvalidInput: If the vectors have different lengths
    """
    a = np.asarray(z)
    b = np.asarray(z_other)
    if a.shape != b.shape:
        msg = f'allocation vectors of lengths {a.size} and {b.size}'
        raise InvalidInput(msg)
    return int(np.count_nonzero(a != b))


def exhaustive_assignment(gain: FloatArray) -> Permutation:
    """Permutation maximising ``Σ_j gain[j, σ(j)]`` by trying every permutation.

    Permutations are tried in lexicographic order starting from the identity; the first
    maximum wins.
    """
    k = gain.shape[0]
    rows = np.arange(k)
    best: tuple[int, ...] = tuple(range(k))
    best_score = -np.inf
    for candidate in itertools.permutations(range(k)):
        score = float(gain[rows, candidate].sum())
        if score > best_score:
            best, best_score = candidate, score
    return Permutation(best)


def solver_assignment(gain: FloatArray) -> Permutation:
    """Permutation maximising ``Σ_j gain[j, σ(j)]`` with the Hungarian method."""
    rows, cols = linear_sum_assignment(gain, maximize=True)
    mapping = [0] * gain.shape[0]
    for j, image in zip(rows, cols, strict=True):
        mapping[j] = int(image)
    return Permutation(tuple(mapping))


def best_permutation(gain: FloatArray) -> Permutation:
    """Exhaustive search up to :data:`EXHAUSTIVE_MAX_K` labels, Hungarian method above."""
    if gain.shape[0] <= EXHAUSTIVE_MAX_K:
        return exhaustive_assignment(gain)
    return solver_assignment(gain)


def processing_order(allocations: LabelArray) -> LabelArray:
    """Sample positions sorted by non-empty block count, then by position."""
    sorted_rows = np.sort(allocations, axis=1)
    nonempty = 1 + np.count_nonzero(np.diff(sorted_rows, axis=1), axis=1)
    return np.lexsort((np.arange(allocations.shape[0]), nonempty))


def relabel_trace(trace: AllocationSamples) -> RelabeledTrace:
    """Align the labels of every sample with the samples relabelled before it.

    The summed distance to all earlier samples is minimised through a running matrix of how
    often each team has carried each label, so each step costs O(N·K + K³) rather than
    growing with the trace.

    Args:
        trace: Sampled allocation vectors (a :class:`~blockleague.sampler.Trace` or the
            output of an earlier relabelling)

    Returns:
        Relabelled samples in the input order

    Raises:
        InvalidInput: If the trace is empty
    """
    allocations = np.asarray(trace.allocations, dtype=np.int64)
    ks = np.asarray(trace.k, dtype=np.int64)
    n_samples, n_teams = allocations.shape
    if n_samples == 0:
        msg = 'cannot relabel an empty trace'
        raise InvalidInput(msg)

    started = time.perf_counter()
    order = processing_order(allocations)
    running = np.zeros((n_teams, int(ks.max())), dtype=np.int64)
    teams = np.arange(n_teams)
    relabeled = np.empty_like(allocations)
    permutations: list[Permutation | None] = [None] * n_samples

    for position, s in enumerate(order):
        z = allocations[s]
        k = int(ks[s])
        if position == 0:
            perm = Permutation.identity(k)
        else:
            # gain[j, l]: earlier samples in which members of block j carried label l
            gain = np.eye(k, dtype=np.int64)[z].T @ running[:, :k]
            perm = best_permutation(gain)
        new_z = perm.apply(z)
        running[teams, new_z] += 1
        relabeled[s] = new_z
        permutations[s] = perm

    logger.debug(
        'relabelled %d samples in %.2fs', n_samples, time.perf_counter() - started
    )
    return RelabeledTrace(
        teams=tuple(trace.teams),
        allocations=relabeled,
        k=ks,
        iterations=np.asarray(trace.iterations, dtype=np.int64),
        permutations=tuple(p for p in permutations if p is not None),
        order=order,
    )


def summed_distance(z: LabelArray, others: Sequence[LabelArray]) -> int:
    """``Σ_t D(z, others[t])``, the quantity each relabelling step minimises."""
    return sum(allocation_distance(z, other) for other in others)
