"""Count cache management utility.

This script provides tools for managing the SQLite cache of separated counts,
including viewing stored counts, cache statistics and clearing the cache.
"""

from mdim_spectra.database.models import CountCache, CountRecord


def format_record(*, record: CountRecord) -> str:
    """Format one cached count as a single line.

    Args:
        record: Cached count.

    Returns:
        Line with the key, count and certificate.
    """
    window = record.window_key or "unconstrained"
    flag = " (lower bound)" if record.lower_bound else ""
    return (
        f"{record.system_key} n={record.n} eps={record.epsilon!r} [{window}]: "
        f"{record.count} via {record.certificate}/{record.regime}{flag}"
    )


def display_records(*, cache: CountCache, limit: int | None = None) -> None:
    """Display cached counts, most recent first.

    Args:
        cache: Count cache.
        limit: Largest number of rows shown.
    """
    records = cache.list_records(limit=limit)

    if not records:
        print("📁 No counts found in cache.")
        return

    print(f"📁 Found {len(records)} cached counts:")
    print("=" * 80)
    for i, record in enumerate(records, 1):
        print(f"{i:4d}. {format_record(record=record)}")


def show_cache_stats(*, cache: CountCache) -> None:
    """Display cache statistics.

    Args:
        cache: Count cache.
    """
    stats = cache.get_database_stats()

    print("📊 Cache Statistics:")
    print("=" * 40)
    print(f"Total counts: {stats['total_counts']}")
    print(f"Distinct systems: {stats['distinct_systems']}")
    print(f"Lower-bound counts: {stats['lower_bound_counts']}")
    print(f"Database size: {stats['database_size_bytes']:,} bytes")
    print(f"Database path: {stats['database_path']}")

    if stats["last_written"]:
        print(f"Last written: {stats['last_written']}")


def clear_cache(*, cache: CountCache, confirmed: bool = False) -> int:
    """Delete every cached count.

    Args:
        cache: Count cache.
        confirmed: Skip the interactive confirmation.

    Returns:
        Number of rows deleted.
    """
    if not confirmed:
        answer = input("⚠️  Delete every cached count? (y/n): ").strip().lower()
        if answer not in ["y", "yes"]:
            print("👋 Cache left untouched.")
            return 0

    removed = cache.clear()
    print(f"✅ Removed {removed} cached counts")
    return removed


def main(*, cache: CountCache, action: str, limit: int | None = None, confirmed: bool = False) -> int:
    """Run one cache action.

    Args:
        cache: Count cache.
        action: One of ``stats``, ``list`` or ``clear``.
        limit: Row limit of ``list``.
        confirmed: Skip the confirmation of ``clear``.

    Returns:
        Exit status.
    """
    print("🗂️  Count Cache Manager")
    print("=" * 40)

    if action == "stats":
        show_cache_stats(cache=cache)
    elif action == "list":
        display_records(cache=cache, limit=limit)
    elif action == "clear":
        clear_cache(cache=cache, confirmed=confirmed)
    else:
        print(f"❌ Unknown action '{action}'. Use stats, list or clear.")
        return 2
    return 0
