"""Tests for separated sets, covers and the counting front end."""

import math
from pathlib import Path

import pytest

from mdim_spectra.common.errors import BudgetError, DomainError
from mdim_spectra.common.potentials import Potential
from mdim_spectra.common.systems import GridFullShift, all_words, min_pairwise_distance, words_to_points
from mdim_spectra.counting.separated import (
    COUNT_CSV_HEADER,
    Certificate,
    CountRegime,
    M_count,
    N_count,
    SeparatedCounter,
    candidate_width,
    check_sandwich,
    cover_rows,
    enumerate_candidates,
    exact_max_separated,
    greedy_maximal_separated,
    information_bound,
    sample_candidates,
    write_count_rows,
)
from mdim_spectra.counting.windows import LevelWindow


def _window(alpha: float, delta: float, n: int) -> LevelWindow:
    return LevelWindow(phi=Potential.first_coordinate(GridFullShift(m=2)), alpha=alpha, delta=delta, n=n)


class TestSeparatedSets:
    """Test cases for greedy and exact separated subsets."""

    def test_enumerate_candidates_width(self) -> None:
        """Test that candidates carry the truncation depth past n."""
        candidates = enumerate_candidates(GridFullShift(m=2), 4, 0.49)
        assert len(candidates) == 2**9
        assert candidates[0].word == (0,) * 9

    def test_enumeration_budget(self) -> None:
        """Test that an oversized family names the cap it needs."""
        with pytest.raises(BudgetError) as excinfo:
            enumerate_candidates(GridFullShift(m=2), 4, 0.49, cap=100)
        assert excinfo.value.required == 512
        assert excinfo.value.cap == 100

    def test_greedy_and_exact_agree_on_small_family(self) -> None:
        """Test both separated searches on the depth-3 words at a coarse scale."""
        sys = GridFullShift(m=2)
        candidates = words_to_points(all_words(2, 3))
        greedy = greedy_maximal_separated(sys, candidates, 1, 0.6)
        best = exact_max_separated(sys, candidates, 1, 0.6)
        assert greedy.count == 2
        assert best.count == 2
        assert best.certificate is Certificate.EXACT_MAXIMUM
        assert [p.word for p in greedy.points] == [(0, 0, 0), (1, 0, 1)]

    def test_exact_search_cap(self) -> None:
        """Test the candidate cap of the exact search."""
        candidates = words_to_points(all_words(2, 5))
        with pytest.raises(BudgetError):
            exact_max_separated(GridFullShift(m=2), candidates, 1, 0.3)

    def test_greedy_needs_candidates(self) -> None:
        """Test that the greedy scan rejects an empty family."""
        with pytest.raises(DomainError):
            greedy_maximal_separated(GridFullShift(m=2), [], 1, 0.3)

    def test_result_is_separated(self) -> None:
        """Test that kept points are pairwise more than eps apart."""
        sys = GridFullShift(m=2)
        separated = greedy_maximal_separated(sys, enumerate_candidates(sys, 3, 0.3), 3, 0.3)
        assert min_pairwise_distance(sys, separated.words(), 3) > 0.3


class TestLevelCounts:
    """Test cases for counts inside a level window."""

    def test_m_count(self) -> None:
        """Test the separated count of the balanced window."""
        separated = M_count(GridFullShift(m=2), _window(0.5, 0.2, 4), 0.49)
        assert separated.count == 6
        assert {sum(p.word[:4]) for p in separated.points} == {2}

    def test_m_count_exact_mode(self) -> None:
        """Test that the exact search gives the same count on a small window."""
        separated = M_count(GridFullShift(m=2), _window(1.0, 0.01, 4), 0.9, exact=True)
        assert separated.count == 1
        assert separated.certificate is Certificate.EXACT_MAXIMUM

    def test_empty_window(self) -> None:
        """Test that an unreachable level gives an empty set."""
        separated = M_count(GridFullShift(m=2), _window(0.6, 0.1, 4), 0.49)
        assert separated.count == 0

    def test_cover_rows(self) -> None:
        """Test a cover of the length-2 words by open balls."""
        assert cover_rows(GridFullShift(m=2), all_words(2, 2), 1, 0.3).tolist() == [0, 2]

    def test_n_count_at_most_m_count(self) -> None:
        """Test that the cover is no larger than the separated set at the same scale."""
        sys = GridFullShift(m=2)
        window = _window(0.5, 0.2, 4)
        assert N_count(sys, window, 0.49) <= M_count(sys, window, 0.49).count


class TestSeparatedCounter:
    """Test cases for the counting front end."""

    def test_trivial_regime(self) -> None:
        """Test that a scale above the diameter counts one point."""
        result = SeparatedCounter(sys=GridFullShift(m=2)).count(n=5, epsilon=1.0)
        assert result.count == 1
        assert result.regime is CountRegime.TRIVIAL

    def test_factored_regime(self) -> None:
        """Test prefix times tail factoring below half the letter gap."""
        counter = SeparatedCounter(sys=GridFullShift(m=2))
        assert counter.tail_count(0.2) == (3, False)
        result = counter.count(n=3, epsilon=0.2)
        assert result.regime is CountRegime.FACTORED
        assert result.count == 8 * 3

    def test_factored_window_uses_dp(self) -> None:
        """Test that windowed factored counts take prefixes from the DP oracle."""
        counter = SeparatedCounter(sys=GridFullShift(m=2))
        result = counter.count(n=4, epsilon=0.2, window=_window(0.5, 0.2, 4))
        assert result.count == 6 * 3
        assert result.alpha == 0.5

    def test_single_tail_below_half_gap(self) -> None:
        """Test that all tails collapse to one just below half the letter gap."""
        counter = SeparatedCounter(sys=GridFullShift(m=2))
        assert counter.tail_count(0.49) == (1, False)
        result = counter.count(n=4, epsilon=0.49)
        assert result.regime is CountRegime.FACTORED
        assert result.count == 16
        windowed = counter.count(n=4, epsilon=0.49, window=_window(0.5, 0.2, 4))
        assert windowed.count == 6
        assert len(counter.results) == 2

    def test_enumerated_regime(self) -> None:
        """Test that scales above half the letter gap enumerate candidate words."""
        counter = SeparatedCounter(sys=GridFullShift(m=2))
        assert candidate_width(counter.sys, 2, 0.6) == 7
        result = counter.count(n=2, epsilon=0.6)
        assert result.regime is CountRegime.ENUMERATED
        assert not result.lower_bound
        assert result.count >= 1

    def test_budget_and_sampling(self) -> None:
        """Test the budget error and the sampled lower-bound fallback."""
        with pytest.raises(BudgetError) as excinfo:
            SeparatedCounter(sys=GridFullShift(m=2), max_candidates=16).count(n=4, epsilon=0.6)
        assert excinfo.value.required == 512
        sampled = SeparatedCounter(sys=GridFullShift(m=2), max_candidates=64, sample=True).count(n=4, epsilon=0.6)
        assert sampled.lower_bound
        assert sampled.regime is CountRegime.SAMPLED
        assert sampled.count >= 1

    def test_invalid_scale(self) -> None:
        """Test that the scale must be positive."""
        with pytest.raises(DomainError):
            SeparatedCounter(sys=GridFullShift(m=2)).count(n=2, epsilon=0.0)

    def test_write_count_rows(self, tmp_path: Path) -> None:
        """Test the counts CSV export."""
        counter = SeparatedCounter(sys=GridFullShift(m=2))
        counter.count(n=2, epsilon=0.2)
        path = tmp_path / "counts.csv"
        assert write_count_rows(path, counter.results) == 1
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == ",".join(COUNT_CSV_HEADER)
        assert lines[1].startswith("grid-full-shift,2,2,0.2,,,12,greedy-maximal,false,factored,")

    def test_information_bound(self) -> None:
        """Test the largest rate a candidate family supports."""
        assert information_bound(GridFullShift(m=2), 4, 0.49) == pytest.approx(9 * math.log(2) / 4)


class TestSamplingAndSandwich:
    """Test cases for sampled candidates and the separated/spanning sandwich."""

    def test_sample_candidates(self) -> None:
        """Test that sampled candidates are distinct, full width and seeded."""
        sys = GridFullShift(m=2)
        first = sample_candidates(sys, 2, 0.49, size=20, seed=1)
        second = sample_candidates(sys, 2, 0.49, size=20, seed=1)
        assert [p.word for p in first] == [p.word for p in second]
        assert 1 <= len(first) <= 20
        assert len({p.word for p in first}) == len(first)
        assert {p.depth for p in first} == {candidate_width(sys, 2, 0.49)}

    def test_check_sandwich(self) -> None:
        """Test that the separated count sits below the cover at half the scale."""
        check = check_sandwich(GridFullShift(m=2), _window(0.5, 0.2, 2), 0.49)
        assert check.n_eps >= 1
        assert check.m_eps <= check.n_half
