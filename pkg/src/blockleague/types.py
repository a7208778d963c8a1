"""Type definitions for blockleague."""

from __future__ import annotations

from typing import Any, Literal, Protocol

import numpy as np
import numpy.typing as npt

LabelArray = npt.NDArray[np.int64]
CountArray = npt.NDArray[np.int64]
FloatArray = npt.NDArray[np.float64]
OutcomeArray = npt.NDArray[np.int8]
KPrior = Literal['poisson', 'uniform']
MatchFormat = Literal['outcome', 'goals']
JSONDict = dict[str, Any]


class AllocationSamples(Protocol):
    """Anything carrying a sequence of sampled (z, K) pairs."""

    @property
    def allocations(self) -> LabelArray: ...

    @property
    def k(self) -> LabelArray: ...

    @property
    def iterations(self) -> LabelArray: ...

    @property
    def teams(self) -> tuple[str, ...]: ...
