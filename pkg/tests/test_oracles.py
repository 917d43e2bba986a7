"""Tests for the DP, Gibbs and weighted-shift oracles."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import entr

from mdim_spectra.common.errors import BudgetError, DomainError
from mdim_spectra.common.systems import WeightedShiftCompact
from mdim_spectra.counting.separated import Certificate
from mdim_spectra.oracles.dp import dp_count_table, hull_count_dp, level_count_dp
from mdim_spectra.oracles.gibbs import constrained_max_entropy, dp_rate_vs_gibbs
from mdim_spectra.oracles.weighted_shift import (
    certify_weighted_shift_cover,
    certify_weighted_shift_grid,
    grid_size,
    required_ell,
    weighted_shift_bounds,
)


class TestDynamicProgramming:
    """Test cases for exact level-set word counts."""

    def test_histogram_is_binomial(self) -> None:
        """Test the Birkhoff sum histogram of the binary first coordinate."""
        table = dp_count_table(m=2, table=[0, 1], n=4)
        assert table.histogram == {Fraction(k): math.comb(4, k) for k in range(5)}
        assert table.total == 16

    def test_level_count(self) -> None:
        """Test the balanced window count at n = 16."""
        assert level_count_dp(m=2, table=[0, 1], alpha=0.5, delta=0.1, n=16) == 35750

    def test_nearest_average(self) -> None:
        """Test the achievable average closest to a target."""
        table = dp_count_table(m=2, table=[0, 1], n=4)
        assert table.nearest_average(0.6) == Fraction(1, 2)

    def test_table_length(self) -> None:
        """Test that the letter table must match the alphabet."""
        with pytest.raises(DomainError):
            dp_count_table(m=3, table=[0, 1], n=2)

    def test_work_budget(self) -> None:
        """Test that the convolution respects its work cap."""
        with pytest.raises(BudgetError):
            dp_count_table(m=2, table=[0, 1], n=50, cap=100)

    def test_hull_counts(self) -> None:
        """Test that hull counts keep only words staying inside the window."""
        counts = hull_count_dp(m=2, table=[0, 1], alpha=0.5, delta=0.6, k_start=1, n_max=3)
        assert counts == {1: 2, 2: 4, 3: 8}
        narrow = hull_count_dp(m=2, table=[0, 1], alpha=0.5, delta=0.3, k_start=2, n_max=4)
        assert narrow[2] == 2
        assert narrow[4] <= level_count_dp(m=2, table=[0, 1], alpha=0.5, delta=0.3, n=4)


class TestGibbs:
    """Test cases for the constrained maximum entropy oracle."""

    def test_interior_mean(self) -> None:
        """Test the Bernoulli entropy at mean 1/4."""
        solution = constrained_max_entropy([0.0, 1.0], 0.25)
        assert solution.entropy == pytest.approx(0.5623351446)
        assert solution.mean([0.0, 1.0]) == pytest.approx(0.25)

    def test_uniform_mean(self) -> None:
        """Test that the centre of a symmetric alphabet gives log m."""
        assert constrained_max_entropy([0.0, 0.5, 1.0], 0.5).entropy == pytest.approx(math.log(3))

    def test_boundary_mean(self) -> None:
        """Test that a boundary mean concentrates on the extreme letters."""
        solution = constrained_max_entropy([0.0, 1.0, 1.0], 1.0)
        assert solution.entropy == pytest.approx(math.log(2))
        assert math.isinf(solution.beta)

    def test_maximum_survives_constrained_perturbations(self) -> None:
        """Test that no perturbation keeping the mean raises the entropy above the Gibbs maximum."""
        values = [0.0, 0.5, 1.0]
        direction = np.array([1.0, -2.0, 1.0])
        rng = np.random.default_rng(2024)
        for alpha in (0.3, 0.5, 0.8):
            solution = constrained_max_entropy(values, alpha)
            p = solution.p
            low, high = -min(p[0], p[2]), p[1] / 2.0
            for _ in range(10):
                q = p + rng.uniform(low, high) * direction
                assert q.sum() == pytest.approx(1.0)
                assert float(q @ np.array(values)) == pytest.approx(alpha)
                assert float(entr(np.clip(q, 0.0, None)).sum()) <= solution.entropy + 1e-9

    def test_mean_outside_range(self) -> None:
        """Test that unreachable means are rejected."""
        with pytest.raises(DomainError):
            constrained_max_entropy([0.0, 1.0], 1.5)

    def test_dp_rate_approaches_gibbs(self) -> None:
        """Test that the exact window rate closes in on the Gibbs entropy."""
        report = dp_rate_vs_gibbs(m=3, table=[0, 0.5, 1], alpha=0.5, delta=0.05, n_schedule=[6, 12])
        assert report.gibbs_entropy == pytest.approx(math.log(3))
        assert report.rows[0].count == 141
        assert report.rows[0].gap == pytest.approx(0.2738, abs=1e-3)
        assert report.rows[1].gap == pytest.approx(0.1645, abs=1e-3)
        assert report.gap_shrinks


class TestWeightedShiftOracle:
    """Test cases for the weighted backward shift bounds."""

    def test_grid_and_cover_sizes(self) -> None:
        """Test the closed-form sizes at eps = 0.1."""
        sys = WeightedShiftCompact()
        assert required_ell(sys, 0.1) == 5
        assert grid_size(sys, 0.1) == 6
        bounds = weighted_shift_bounds(sys, 0.1, 4)
        assert bounds.cover_size == 240
        assert bounds.log_lower == pytest.approx(4 * math.log(6))

    def test_ratios(self) -> None:
        """Test the lower ratio at a small scale and the shrinking upper ratio."""
        sys = WeightedShiftCompact()
        assert weighted_shift_bounds(sys, 0.02, 3).lower_ratio == pytest.approx(math.log(26) / -math.log(0.02))
        uppers = [weighted_shift_bounds(sys, 0.1, n).upper_ratio for n in (2, 8, 32)]
        assert uppers == sorted(uppers, reverse=True)
        assert all(u >= weighted_shift_bounds(sys, 0.1, 2).lower_ratio for u in uppers)

    def test_lower_ratio_band(self) -> None:
        """Test that the grid ratio stays in [0.7, 1.3] at small scales while the cover ratio shrinks in n."""
        sys = WeightedShiftCompact()
        for eps in (0.05, 0.02, 0.01):
            assert 0.7 <= weighted_shift_bounds(sys, eps, 4).lower_ratio <= 1.3
        uppers = [weighted_shift_bounds(sys, 0.02, n).upper_ratio for n in (4, 16, 64, 256)]
        assert all(b < a for a, b in zip(uppers, uppers[1:], strict=False))
        assert uppers[-1] >= weighted_shift_bounds(sys, 0.02, 256).lower_ratio

    def test_heavy_tail_ell_is_rejected(self) -> None:
        """Test that an explicit ell must satisfy the tail condition."""
        with pytest.raises(DomainError):
            weighted_shift_bounds(WeightedShiftCompact(), 0.1, 2, ell=2)

    def test_grid_certificate(self) -> None:
        """Test that adjacent grid points sit exactly eps apart."""
        certificate = certify_weighted_shift_grid(WeightedShiftCompact(), 0.1, 1)
        assert certificate.points == 6
        assert certificate.min_distance == pytest.approx(0.1)
        assert certificate.non_strict
        assert not certificate.strict
        assert certificate.certificate is Certificate.EXPLICIT_GRID

    def test_grid_certificate_cap(self) -> None:
        """Test the point cap of the grid certificate."""
        with pytest.raises(BudgetError):
            certify_weighted_shift_grid(WeightedShiftCompact(), 0.1, 6, cap=1000)

    def test_cover_certificate(self) -> None:
        """Test that sampled pairs in one cover element are eps-close."""
        certificate = certify_weighted_shift_cover(WeightedShiftCompact(), 0.1, 1, samples=50, seed=3)
        assert certificate.samples == 50
        assert certificate.covered
        assert certificate.valid
