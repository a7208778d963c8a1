"""Descriptive competitive-balance indices computed from points shares."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
from scipy import stats as st

from blockleague.exceptions import InvalidInput
from blockleague.league import points_table

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from blockleague.league import PointsTable, ResultsMatrix
    from blockleague.types import JSONDict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IndexReport:
    """Balance indices of one season.

    Attributes:
        season: Season identifier
        hhicb: ``n Σ p_i²``, 1 for a perfectly balanced league
        relative_entropy: ``Σ p_i log p_i / log(1/n)``, 1 for a perfectly balanced league
        zero_share: True if some team had no points (``0 log 0`` taken as 0)
    """

    season: str
    hhicb: float
    relative_entropy: float
    zero_share: bool = False


def hhicb(pt: PointsTable) -> float:
    """Herfindahl–Hirschman index of competitive balance.

    Raises:
        DegenerateSeason: If no team has any points
    """
    p = pt.shares
    return float(pt.n_teams * np.square(p).sum())


def relative_entropy(pt: PointsTable) -> float:
    """Shannon entropy of the points shares normalized by ``log n``.

    Raises:
        DegenerateSeason: If no team has any points
    """
    p = pt.shares
    if (p == 0).any():
        logger.warning(
            '%d team(s) without points; using 0 log 0 = 0', int(np.count_nonzero(p == 0))
        )
    positive = p[p > 0]
    return float((positive * np.log(positive)).sum() / math.log(1.0 / pt.n_teams))


def index_report(season: str, r: ResultsMatrix, points_per_win: int = 3) -> IndexReport:
    """Both indices for one season under a points-per-win scheme."""
    pt = points_table(r, points_per_win)
    return IndexReport(
        season=season,
        hhicb=hhicb(pt),
        relative_entropy=relative_entropy(pt),
        zero_share=bool((pt.points == 0).any()),
    )


def reports_frame(
    reports: Sequence[IndexReport], k1_probs: Mapping[str, float] | None = None
) -> pd.DataFrame:
    """``season, hhicb, relative_entropy, pi_k1`` rows; ``pi_k1`` is empty without fits."""
    frame = pd.DataFrame(
        {
            'season': [rep.season for rep in reports],
            'hhicb': [rep.hhicb for rep in reports],
            'relative_entropy': [rep.relative_entropy for rep in reports],
        }
    )
    probs = k1_probs or {}
    frame['pi_k1'] = [probs.get(rep.season, np.nan) for rep in reports]
    return frame


def _rank_correlation(x: Sequence[float], y: Sequence[float]) -> float | None:
    if len(x) < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return None
    rho = st.spearmanr(x, y).statistic
    return None if np.isnan(rho) else float(rho)


def index_vs_posterior(
    reports: Sequence[IndexReport], k1_probs: Mapping[str, float]
) -> JSONDict:
    """Spearman correlations of each index with ``π(K = 1 | y)`` over the shared seasons.

    A correlation is ``None`` when either series is constant or fewer than two seasons pair up.

    Raises:
        InvalidInput: If no season has both an index report and a fitted ``π(K = 1 | y)``
    """
    paired = [rep for rep in reports if rep.season in k1_probs]
    if not paired:
        msg = 'no season has both indices and a fitted posterior'
        raise InvalidInput(msg)
    skipped = len(reports) - len(paired)
    if skipped:
        logger.warning('%d season(s) without a fitted posterior left out', skipped)
    pi_k1 = [float(k1_probs[rep.season]) for rep in paired]
    return {
        'seasons': [rep.season for rep in paired],
        'pi_k1': pi_k1,
        'hhicb': [rep.hhicb for rep in paired],
        'relative_entropy': [rep.relative_entropy for rep in paired],
        'spearman_hhicb': _rank_correlation([rep.hhicb for rep in paired], pi_k1),
        'spearman_relative_entropy': _rank_correlation(
            [rep.relative_entropy for rep in paired], pi_k1
        ),
    }


def linear_trend(values: Sequence[float]) -> float:
    """Least-squares slope of a series against its position.

    Raises:
        InvalidInput: If fewer than two values are given
    """
    if len(values) < 2:
        msg = 'a trend needs at least two values'
        raise InvalidInput(msg)
    slope, _ = np.polyfit(np.arange(len(values), dtype=np.float64), values, 1)
    return float(slope)
