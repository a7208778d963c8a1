"""Log-space numerical helpers shared by the model and the moves."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import gammaln

if TYPE_CHECKING:
    from blockleague.types import CountArray, FloatArray


def accept(log_alpha: float, rng: np.random.Generator) -> bool:
    """Metropolis acceptance test carried out in log space.

    Args:
        log_alpha: Log acceptance ratio (may be positive or ``-inf``)
        rng: Generator supplying the uniform draw

    Returns:
        True if ``log(u) < log_alpha`` for ``u ~ Uniform(0, 1)``
    """
    # exactly one draw per test, whatever the ratio
    u = rng.random()
    if log_alpha >= 0.0:
        return True
    return u > 0.0 and math.log(u) < log_alpha


def dirichlet_multinomial_log_terms(counts: CountArray, beta: FloatArray) -> FloatArray:
    """Log marginal likelihood of each categorical count vector under Dir(beta).

    The last axis of ``counts`` holds the outcome counts; every other axis is kept.

    Args:
        counts: Integer counts with outcomes on the last axis
        beta: Dirichlet concentration, one entry per outcome

    Returns:
        Array of log terms ``log B(N + beta) - log B(beta)``
    """
    beta_sum = float(beta.sum())
    log_norm = gammaln(beta_sum) - gammaln(beta).sum()
    shifted = counts + beta
    return (
        log_norm + gammaln(shifted).sum(axis=-1) - gammaln(counts.sum(axis=-1) + beta_sum)
    )


def unit_dirichlet_multinomial_log_terms(counts: CountArray) -> FloatArray:
    """Closed-form log terms for Dir(1, 1, 1).

    ``log Γ(3) + Σ log Γ(N+1) - log Γ(Σ N + 3)``, i.e. the block factor of the collapsed
    posterior with unit concentrations.

    Args:
        counts: Integer counts with three outcomes on the last axis

    Returns:
        Array of log terms
    """
    return (
        math.log(2.0)
        + gammaln(counts + 1.0).sum(axis=-1)
        - gammaln(counts.sum(axis=-1) + 3.0)
    )


class DirichletMultinomialTable:
    """Dirichlet-multinomial log terms for bounded counts, read from precomputed log-gammas.

    Agrees with :func:`dirichlet_multinomial_log_terms` for cell totals up to ``max_count``.
    Built once per move object; the single-site sweep only indexes into it.
    """

    def __init__(self, beta: FloatArray, max_count: int) -> None:
        """Tabulate ``log Γ(c + β_w)`` and ``log Γ(c + Σβ)`` for ``c = 0..max_count``.

        Args:
            beta: Dirichlet concentration, one entry per outcome
            max_count: Largest cell total that will be looked up
        """
        beta = np.asarray(beta, dtype=np.float64)
        beta_sum = float(beta.sum())
        grid = np.arange(max_count + 1, dtype=np.float64)
        self.max_count = max_count
        self._per_outcome = gammaln(grid[:, None] + beta)
        self._per_total = gammaln(grid + beta_sum)
        self._log_norm = float(gammaln(beta_sum) - gammaln(beta).sum())
        self._outcomes = np.arange(beta.size)

    def terms(self, counts: CountArray) -> FloatArray:
        """Log term of every count vector; outcomes on the last axis."""
        return (
            self._log_norm
            + self._per_outcome[counts, self._outcomes].sum(axis=-1)
            - self._per_total[counts.sum(axis=-1)]
        )

    def total(self, counts: CountArray) -> float:
        """Sum of :meth:`terms` over every count vector."""
        return float(self.terms(counts).sum())


def log_beta_split(n_stay: int, n_move: int, a: float = 1.0) -> float:
    """Log probability of one specific two-way split with a Beta(a, a) mixing weight.

    Each of ``n_stay + n_move`` items independently moves with probability ``p ~ Beta(a, a)``;
    integrating ``p`` out gives ``B(n_stay + a, n_move + a) / B(a, a)``.

    Args:
        n_stay: Items left in place
        n_move: Items moved
        a: Beta concentration (1 gives a uniform mixing weight)

    Returns:
        Log probability of the split
    """
    return (
        math.lgamma(n_stay + a)
        + math.lgamma(n_move + a)
        - math.lgamma(n_stay + n_move + 2.0 * a)
        + math.lgamma(2.0 * a)
        - 2.0 * math.lgamma(a)
    )


def total_variation(p: FloatArray, q: FloatArray) -> float:
    """Total-variation distance between two probability vectors of equal length."""
    width = max(len(p), len(q))
    p_full = np.zeros(width)
    q_full = np.zeros(width)
    p_full[: len(p)] = p
    q_full[: len(q)] = q
    return 0.5 * float(np.abs(p_full - q_full).sum())
