"""Tests for the log-space helpers."""

import math

import numpy as np
import pytest

from blockleague.utils import (
    DirichletMultinomialTable,
    accept,
    dirichlet_multinomial_log_terms,
    log_beta_split,
    total_variation,
    unit_dirichlet_multinomial_log_terms,
)


class FixedRng:
    def __init__(self, u):
        self.u = u
        self.calls = 0

    def random(self):
        self.calls += 1
        return self.u


class TestAccept:
    def test_non_negative_ratio_always_accepts(self):
        rng = FixedRng(0.999)

        assert accept(0.0, rng)
        assert accept(3.0, rng)
        assert rng.calls == 2

    @pytest.mark.parametrize(('u', 'expected'), [(0.1, True), (0.3, False), (0.0, False)])
    def test_threshold(self, u, expected):
        assert accept(math.log(0.2), FixedRng(u)) is expected

    def test_minus_infinity_rejects(self):
        rng = FixedRng(1e-300)

        assert not accept(-math.inf, rng)
        assert rng.calls == 1

    def test_one_draw_per_call(self):
        a = np.random.default_rng(3)
        b = np.random.default_rng(3)

        accept(5.0, a)
        b.random()

        assert a.random() == b.random()


class TestDirichletTerms:
    def test_unit_closed_form(self):
        counts = np.array([[2, 1, 0], [0, 0, 0]], dtype=np.int64)

        terms = unit_dirichlet_multinomial_log_terms(counts)

        # 2! 1! 0! 2! / 5!
        assert terms[0] == pytest.approx(math.log(1 / 30))
        assert terms[1] == pytest.approx(0.0)

    def test_general_matches_unit(self):
        counts = np.arange(27, dtype=np.int64).reshape(3, 3, 3)

        general = dirichlet_multinomial_log_terms(counts, np.ones(3))

        assert general == pytest.approx(unit_dirichlet_multinomial_log_terms(counts))

    def test_single_observation_is_prior_mean(self):
        beta = np.array([2.0, 1.0, 1.0])

        terms = dirichlet_multinomial_log_terms(np.array([1, 0, 0]), beta)

        assert float(terms) == pytest.approx(math.log(0.5))


class TestDirichletMultinomialTable:
    @pytest.mark.parametrize('beta', [(1.0, 1.0, 1.0), (1.5, 0.5, 2.0)])
    def test_matches_direct_terms(self, beta):
        beta = np.asarray(beta)
        rng = np.random.default_rng(5)
        counts = rng.integers(0, 10, size=(4, 4, 3))
        table = DirichletMultinomialTable(beta, max_count=30)

        expected = dirichlet_multinomial_log_terms(counts, beta)

        assert table.terms(counts) == pytest.approx(expected)
        assert table.total(counts) == pytest.approx(float(expected.sum()))

    def test_largest_cell(self):
        table = DirichletMultinomialTable(np.ones(3), max_count=6)
        counts = np.array([[6, 0, 0], [2, 2, 2]])

        assert table.terms(counts) == pytest.approx(unit_dirichlet_multinomial_log_terms(counts))


class TestCombinatorics:
    def test_beta_split(self):
        assert log_beta_split(2, 1) == pytest.approx(math.log(1 / 12))
        assert log_beta_split(0, 0) == pytest.approx(0.0)

    def test_beta_split_sums_to_one(self):
        n = 5
        total = sum(math.comb(n, m) * math.exp(log_beta_split(n - m, m, 0.7)) for m in range(6))

        assert total == pytest.approx(1.0)


class TestTotalVariation:
    def test_pads_shorter_vector(self):
        assert total_variation(np.array([0.5, 0.5]), np.array([1.0])) == pytest.approx(0.5)

    def test_identical(self):
        p = np.array([0.2, 0.3, 0.5])

        assert total_variation(p, p) == 0.0
