"""Tests for orbit gluing and the staged Moran construction."""

import math

import pytest

from mdim_spectra.common.errors import BudgetError, ContractError, DomainError, EmptyLevelError
from mdim_spectra.common.potentials import Potential
from mdim_spectra.common.systems import GridFullShift, Point, dynamical_distance
from mdim_spectra.measures.finite import FiniteMeasure
from mdim_spectra.specification.moran import (
    birkhoff_control,
    build_Ck_Tk,
    build_moran,
    build_Sk,
    edp_lower_bound,
    eta_measure,
    gap_for,
    glue,
    moran_set_contains,
)
from mdim_spectra.spectra.rates import lambda_at_scale

EPSILON = 0.49
SYS = GridFullShift(m=2)
PHI = Potential.first_coordinate(SYS)


class TestGapAndGlue:
    """Test cases for the specification gap and orbit gluing."""

    def test_gap_for(self) -> None:
        """Test the least gap with cylinder diameter below eps/2."""
        assert gap_for(SYS, 0.1) == 5
        assert gap_for(SYS, 0.5) == 3
        assert gap_for(SYS, EPSILON / 4) == 5
        assert gap_for(SYS, EPSILON / 8) == 6
        assert gap_for(SYS, 2.5) == 0
        with pytest.raises(DomainError):
            gap_for(SYS, 0.0)

    def test_glue_shadows_each_segment(self) -> None:
        """Test that every segment is shadowed within eps."""
        first, second = Point(word=(0, 1, 1, 0)), Point(word=(1, 0, 0, 1))
        orbit = glue(SYS, [(first, 4), (second, 4)], 5, 0.1)
        assert orbit.starts == (0, 9)
        assert orbit.total_length == 13
        assert orbit.glued.word[:4] == first.word
        assert orbit.glued.word[9:13] == second.word
        assert all(d < 0.1 for d in orbit.shadow_distances)
        shifted = Point(word=orbit.glued.word[9:])
        assert dynamical_distance(SYS, shifted, second, 4) < 0.1

    def test_glue_rejects_short_gap(self) -> None:
        """Test that a gap below the specification gap is a contract violation."""
        with pytest.raises(ContractError):
            glue(SYS, [(Point(word=(0, 1)), 2)], 2, 0.1)

    def test_glue_needs_segments(self) -> None:
        """Test that gluing nothing is rejected."""
        with pytest.raises(DomainError):
            glue(SYS, [], 5, 0.1)
        with pytest.raises(DomainError):
            glue(SYS, [(Point(word=(0,)), 0)], 5, 0.1)


class TestStages:
    """Test cases for S_k, C_k and T_k."""

    def test_build_sk(self) -> None:
        """Test the separated window set of the first stage."""
        separated = build_Sk(SYS, PHI, 0.5, 0.2, 4, EPSILON)
        assert separated.count == 6

    def test_build_sk_empty_window(self) -> None:
        """Test that an empty window names the nearest potential value."""
        with pytest.raises(EmptyLevelError) as excinfo:
            build_Sk(SYS, PHI, 0.6, 0.1, 4, EPSILON)
        assert excinfo.value.nearest_alpha == 1.0

    def test_single_block_stage(self) -> None:
        """Test that one block per stage keeps the separated set."""
        separated = build_Sk(SYS, PHI, 0.5, 0.2, 4, EPSILON)
        level = build_Ck_Tk(SYS, separated, 1.0, 1, phi=PHI, alpha=0.5, delta=0.2, epsilon=EPSILON)
        assert level.k == 1
        assert len(level.T_k) == 6
        assert level.t_k == 4
        assert level.m_k == 5
        assert level.min_separation > EPSILON
        assert level.max_nesting is None

    def test_two_block_stage(self) -> None:
        """Test the product rule for two blocks."""
        separated = build_Sk(SYS, PHI, 0.5, 0.2, 4, EPSILON)
        level = build_Ck_Tk(SYS, separated, 1.0, 2, phi=PHI, alpha=0.5, delta=0.2, epsilon=EPSILON)
        assert len(level.C_k) == 36
        assert level.c_k == 13
        assert level.t_k == 13
        assert level.gap_symbols == 5
        assert level.c_separation > EPSILON

    def test_tuple_cap(self) -> None:
        """Test that oversized products are refused."""
        separated = build_Sk(SYS, PHI, 0.5, 0.2, 4, EPSILON)
        with pytest.raises(BudgetError) as excinfo:
            build_Ck_Tk(SYS, separated, 1.0, 2, phi=PHI, alpha=0.5, delta=0.2, epsilon=EPSILON, tuple_cap=10)
        assert excinfo.value.required == 36

    def test_blocks_must_be_positive(self) -> None:
        """Test that [R N] must be at least one."""
        separated = build_Sk(SYS, PHI, 0.5, 0.2, 4, EPSILON)
        with pytest.raises(DomainError):
            build_Ck_Tk(SYS, separated, 0.4, 2, phi=PHI, alpha=0.5, delta=0.2, epsilon=EPSILON)

    def test_second_stage_nests_in_first(self) -> None:
        """Test the second stage lengths, nesting and separation."""
        first, second = build_moran(
            SYS, PHI, 0.5, deltas=[0.2, 0.3], n_values=[4, 2], R=1.0, N=[1, 2], epsilon=EPSILON
        )
        assert len(second.S_k.points) == 2
        assert second.m_k == 6
        assert len(second.C_k) == 4
        assert second.c_k == 10
        assert second.t_k == 20
        assert len(second.T_k) == 24
        assert second.parents[:4] == (0, 0, 0, 0)
        assert second.max_nesting is not None
        assert second.max_nesting < EPSILON / 4
        assert second.min_separation > 3 * EPSILON / 4
        assert second.deltas == (0.2, 0.3)
        assert first.t_k == 4

    def test_stage_lengths_must_match(self) -> None:
        """Test that every per-stage list has one entry per stage."""
        with pytest.raises(DomainError):
            build_moran(SYS, PHI, 0.5, deltas=[0.2, 0.3], n_values=[4], R=1.0, N=[1, 2], epsilon=EPSILON)


class TestStageProperties:
    """Test cases for Birkhoff control, membership and the ball bound."""

    def test_birkhoff_control(self) -> None:
        """Test that every stage point stays within the certified bound."""
        levels = build_moran(SYS, PHI, 0.5, deltas=[0.2, 0.3], n_values=[4, 2], R=1.0, N=[1, 2], epsilon=EPSILON)
        first, second = (birkhoff_control(SYS, level) for level in levels)
        assert first.max_deviation == pytest.approx(0.0)
        assert first.holds
        assert second.max_deviation == pytest.approx(0.3)
        assert second.bound == pytest.approx(0.6)
        assert second.holds

    def test_moran_set_contains(self) -> None:
        """Test membership of stage points and of a point off the level."""
        (level,) = build_moran(SYS, PHI, 0.5, deltas=[0.2], n_values=[4], R=1.0, N=[1], epsilon=EPSILON)
        assert moran_set_contains(SYS, level, level.T_k[0])
        assert not moran_set_contains(SYS, level, Point(word=(1, 1, 1, 1)))

    def test_edp_bound_reaches_lambda(self) -> None:
        """Test that length-8 segments put the ball bound within 0.15 nats of Lambda at the same window."""
        (level,) = build_moran(
            SYS, PHI, 0.5, deltas=[0.2], n_values=[8], R=1.0, N=[1], epsilon=EPSILON, cap=8192
        )
        bound = edp_lower_bound(SYS, eta_measure(level.T_k, 2), level.T_k, level.t_k, EPSILON)
        lam = lambda_at_scale(SYS, PHI, 0.5, EPSILON, [0.2], range(2, 15))
        assert bound.value == pytest.approx(math.log(182) / 8)
        assert len(bound.samples) == 182
        assert not bound.degenerate
        assert lam.value == pytest.approx(math.log(182) / 8)
        assert bound.value >= lam.value - 0.15

    def test_short_segments_fall_short_of_lambda(self) -> None:
        """Test that length-4 segments give log(#T)/t more than 0.15 nats below Lambda."""
        (level,) = build_moran(SYS, PHI, 0.5, deltas=[0.2], n_values=[4], R=1.0, N=[1], epsilon=EPSILON)
        bound = edp_lower_bound(SYS, eta_measure(level.T_k, 2), level.T_k, level.t_k, EPSILON)
        lam = lambda_at_scale(SYS, PHI, 0.5, EPSILON, [0.2], range(2, 15))
        assert bound.value == pytest.approx(math.log(6) / 4)
        assert bound.value < lam.value - 0.15

    def test_edp_bound_single_point(self) -> None:
        """Test that a single atom carries full mass and gives zero."""
        (level,) = build_moran(SYS, PHI, 1.0, deltas=[0.01], n_values=[4], R=1.0, N=[1], epsilon=EPSILON)
        assert len(level.T_k) == 1
        bound = edp_lower_bound(SYS, eta_measure(level.T_k, 2), level.T_k, level.t_k, EPSILON)
        assert bound.degenerate
        assert bound.value == 0.0

    def test_edp_bound_input_checks(self) -> None:
        """Test the measure and sample requirements of the ball bound."""
        atoms = [Point(word=(0, 0, 0, 0))]
        with pytest.raises(DomainError):
            edp_lower_bound(SYS, FiniteMeasure.bernoulli([0.5, 0.5]), atoms, 4, EPSILON)
        with pytest.raises(DomainError):
            edp_lower_bound(SYS, eta_measure(atoms, 2), [Point(word=(1, 1, 1, 1))], 4, EPSILON)
        with pytest.raises(DomainError):
            eta_measure([], 2)
