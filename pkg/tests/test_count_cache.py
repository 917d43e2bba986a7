"""Tests for the SQLite count cache and the cache management script."""

from pathlib import Path

import pytest

from mdim_spectra.common.systems import GridFullShift
from mdim_spectra.counting.separated import CountRegime, SeparatedCounter
from mdim_spectra.database.models import CountCache, CountCacheConfig, CountRecord
from scripts import manage_cache


@pytest.fixture
def cache(tmp_path: Path) -> CountCache:
    """Empty cache in a temporary directory."""
    return CountCache(config=CountCacheConfig(db_path=tmp_path / "nested" / "counts.db"))


def _record(*, n: int = 4, count: int = 16, lower_bound: bool = False) -> CountRecord:
    return CountRecord(
        system_key="grid-full-shift:m=2",
        n=n,
        epsilon=0.1,
        window_key="",
        count=count,
        certificate="greedy-maximal",
        lower_bound=lower_bound,
        regime="enumerated",
    )


class TestCountCache:
    """Test cases for storing and looking up counts."""

    def test_store_and_lookup(self, cache: CountCache) -> None:
        """Test that a stored count is found by its exact key."""
        cache.store(record=_record())
        assert cache.lookup(system_key="grid-full-shift:m=2", n=4, epsilon=0.1) == _record()
        assert cache.lookup(system_key="grid-full-shift:m=2", n=4, epsilon=0.1 + 1e-12) is None
        assert cache.lookup(system_key="grid-full-shift:m=2", n=5, epsilon=0.1) is None

    def test_counts_beyond_64_bits(self, cache: CountCache) -> None:
        """Test that huge counts survive the round trip exactly."""
        huge = 3**90
        cache.store(record=_record(count=huge))
        record = cache.lookup(system_key="grid-full-shift:m=2", n=4, epsilon=0.1)
        assert record is not None
        assert record.count == huge

    def test_store_replaces(self, cache: CountCache) -> None:
        """Test that the same key keeps one row."""
        cache.store(record=_record(count=10))
        cache.store(record=_record(count=12))
        assert [r.count for r in cache.list_records()] == [12]

    def test_list_clear_and_stats(self, cache: CountCache) -> None:
        """Test listing order, statistics and clearing."""
        cache.store(record=_record(n=2))
        cache.store(record=_record(n=3, lower_bound=True))
        assert [r.n for r in cache.list_records()] == [3, 2]
        assert len(cache.list_records(limit=1)) == 1
        stats = cache.get_database_stats()
        assert stats["total_counts"] == 2
        assert stats["distinct_systems"] == 1
        assert stats["lower_bound_counts"] == 1
        assert cache.clear() == 2
        assert cache.list_records() == []

    def test_counter_uses_cache(self, cache: CountCache) -> None:
        """Test that a second counter reads the first counter's result."""
        first = SeparatedCounter(sys=GridFullShift(m=2), cache=cache).count(n=4, epsilon=0.49)
        again = SeparatedCounter(sys=GridFullShift(m=2), cache=cache).count(n=4, epsilon=0.49)
        assert again.count == first.count == 16
        assert again.regime is CountRegime.FACTORED
        assert len(cache.list_records()) == 1


class TestManageCache:
    """Test cases for the cache management script."""

    def test_format_record(self) -> None:
        """Test the one-line rendering of a cached count."""
        line = manage_cache.format_record(record=_record(lower_bound=True))
        assert line == (
            "grid-full-shift:m=2 n=4 eps=0.1 [unconstrained]: 16 via greedy-maximal/enumerated (lower bound)"
        )

    def test_actions(self, cache: CountCache, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the stats, list and clear actions."""
        cache.store(record=_record())
        assert manage_cache.main(cache=cache, action="stats") == 0
        assert "Total counts: 1" in capsys.readouterr().out
        assert manage_cache.main(cache=cache, action="list") == 0
        assert "Found 1 cached counts" in capsys.readouterr().out
        assert manage_cache.main(cache=cache, action="clear", confirmed=True) == 0
        assert cache.list_records() == []
        assert manage_cache.main(cache=cache, action="vacuum") == 2

    def test_clear_can_be_declined(self, cache: CountCache, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test that answering no keeps the cache."""
        cache.store(record=_record())
        monkeypatch.setattr("builtins.input", lambda _prompt: "n")
        assert manage_cache.clear_cache(cache=cache) == 0
        assert len(cache.list_records()) == 1
