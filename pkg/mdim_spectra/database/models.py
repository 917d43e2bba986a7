"""SQLite cache of separated-set counts.

Counts are deterministic functions of (system, n, epsilon, level window), so a
cached value can replace a recomputation without changing any report.

Database Schema:
===============

Table: separated_counts
-----------------------
- id (INTEGER PRIMARY KEY AUTOINCREMENT): Row ID
- system_key (TEXT NOT NULL): Stable system identifier, e.g. "grid-full-shift:m=2"
- n (INTEGER NOT NULL): Orbit length
- epsilon (TEXT NOT NULL): Scale, stored as its repr so lookups are exact
- window_key (TEXT NOT NULL): Level window identifier ("" for the whole space)
- count (TEXT NOT NULL): Exact count as a decimal string (counts exceed 64 bits)
- certificate (TEXT NOT NULL): greedy-maximal, exact-maximum or explicit-grid
- lower_bound (BOOLEAN NOT NULL): Whether the count came from sampled candidates
- regime (TEXT NOT NULL): Counting path that produced the value
- elapsed_ms (REAL): Time spent computing the value (nullable)
- created_at (TIMESTAMP NOT NULL): When the row was written

Indexes:
--------
- UNIQUE on (system_key, n, epsilon, window_key)
- INDEX on created_at
"""

import logging
import sqlite3
from dataclasses import dataclass
from pathlib import Path
from typing import Any

logger = logging.getLogger(__name__)


@dataclass
class CountCacheConfig:
    """Configuration for the SQLite count cache."""

    db_path: Path
    timeout: float = 30.0

    def __post_init__(self) -> None:
        """Ensure the database directory exists."""
        self.db_path.parent.mkdir(parents=True, exist_ok=True)


@dataclass(frozen=True)
class CountRecord:
    """One cached count."""

    system_key: str
    n: int
    epsilon: float
    window_key: str
    count: int
    certificate: str
    lower_bound: bool
    regime: str
    elapsed_ms: float | None = None


class CountCache:
    """SQLite store for separated-set counts."""

    def __init__(self, *, config: CountCacheConfig) -> None:
        """Initialize the cache.

        Args:
            config: Database configuration.
        """
        self.config = config
        self._init_database()

    def _connect(self) -> sqlite3.Connection:
        return sqlite3.connect(self.config.db_path, timeout=self.config.timeout)

    def _init_database(self) -> None:
        """Create tables and indexes if they don't exist."""
        with self._connect() as conn:
            conn.execute(
                """
                CREATE TABLE IF NOT EXISTS separated_counts (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    system_key TEXT NOT NULL,
                    n INTEGER NOT NULL,
                    epsilon TEXT NOT NULL,
                    window_key TEXT NOT NULL DEFAULT '',
                    count TEXT NOT NULL,
                    certificate TEXT NOT NULL,
                    lower_bound BOOLEAN NOT NULL DEFAULT 0,
                    elapsed_ms REAL,
                    created_at TIMESTAMP NOT NULL DEFAULT CURRENT_TIMESTAMP
                )
            """
            )

            self._migrate_database(conn)

            conn.execute(
                """
                CREATE UNIQUE INDEX IF NOT EXISTS idx_counts_query
                ON separated_counts (system_key, n, epsilon, window_key)
            """
            )
            conn.execute("CREATE INDEX IF NOT EXISTS idx_counts_created_at ON separated_counts (created_at)")
            conn.commit()

    def _migrate_database(self, conn: sqlite3.Connection) -> None:
        """Add columns introduced after the first schema version.

        Args:
            conn: SQLite connection object.
        """
        cursor = conn.execute("PRAGMA table_info(separated_counts)")
        columns = [row[1] for row in cursor.fetchall()]

        if "regime" not in columns:
            conn.execute("ALTER TABLE separated_counts ADD COLUMN regime TEXT NOT NULL DEFAULT 'enumerated'")
            logger.info("added regime column to count cache %s", self.config.db_path)

    def lookup(self, *, system_key: str, n: int, epsilon: float, window_key: str = "") -> CountRecord | None:
        """Fetch a cached count.

        Args:
            system_key: System identifier.
            n: Orbit length.
            epsilon: Scale.
            window_key: Level window identifier, empty for the whole space.

        Returns:
            The cached record, or None on a miss.
        """
        with self._connect() as conn:
            conn.row_factory = sqlite3.Row
            cursor = conn.execute(
                """
                SELECT * FROM separated_counts
                WHERE system_key = ? AND n = ? AND epsilon = ? AND window_key = ?
            """,
                (system_key, n, repr(epsilon), window_key),
            )
            row = cursor.fetchone()

            if not row:
                return None

            return self._row_to_record(row=row)

    def store(self, *, record: CountRecord) -> None:
        """Insert or replace a count.

        Args:
            record: The count to store.
        """
        with self._connect() as conn:
            conn.execute(
                """
                INSERT OR REPLACE INTO separated_counts (
                    system_key, n, epsilon, window_key, count, certificate, lower_bound, regime, elapsed_ms
                ) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)
            """,
                (
                    record.system_key,
                    record.n,
                    repr(record.epsilon),
                    record.window_key,
                    str(record.count),
                    record.certificate,
                    record.lower_bound,
                    record.regime,
                    record.elapsed_ms,
                ),
            )
            conn.commit()

    def list_records(self, *, limit: int | None = None) -> list[CountRecord]:
        """List cached counts, most recent first.

        Args:
            limit: Optional limit on the number of rows.

        Returns:
            Cached records.
        """
        with self._connect() as conn:
            conn.row_factory = sqlite3.Row

            if limit:
                cursor = conn.execute("SELECT * FROM separated_counts ORDER BY id DESC LIMIT ?", (limit,))
            else:
                cursor = conn.execute("SELECT * FROM separated_counts ORDER BY id DESC")

            return [self._row_to_record(row=row) for row in cursor.fetchall()]

    def clear(self) -> int:
        """Delete every cached count.

        Returns:
            Number of rows removed.
        """
        with self._connect() as conn:
            cursor = conn.execute("DELETE FROM separated_counts")
            conn.commit()
            return cursor.rowcount

    def get_database_stats(self) -> dict[str, Any]:
        """Get statistics about the cache.

        Returns:
            Dictionary with cache statistics.
        """
        with self._connect() as conn:
            total_count = conn.execute("SELECT COUNT(*) FROM separated_counts").fetchone()[0]
            systems = conn.execute("SELECT COUNT(DISTINCT system_key) FROM separated_counts").fetchone()[0]
            lower = conn.execute("SELECT COUNT(*) FROM separated_counts WHERE lower_bound = 1").fetchone()[0]
            last_written = conn.execute("SELECT MAX(created_at) FROM separated_counts").fetchone()[0]

            db_size = self.config.db_path.stat().st_size if self.config.db_path.exists() else 0

            return {
                "total_counts": total_count,
                "distinct_systems": systems,
                "lower_bound_counts": lower,
                "last_written": last_written,
                "database_size_bytes": db_size,
                "database_path": str(self.config.db_path),
            }

    def _row_to_record(self, *, row: sqlite3.Row) -> CountRecord:
        """Convert a database row to a CountRecord."""
        return CountRecord(
            system_key=row["system_key"],
            n=row["n"],
            epsilon=float(row["epsilon"]),
            window_key=row["window_key"],
            count=int(row["count"]),
            certificate=row["certificate"],
            lower_bound=bool(row["lower_bound"]),
            regime=row["regime"],
            elapsed_ms=row["elapsed_ms"],
        )


def get_default_cache() -> CountCache:
    """Get the default count cache.

    Returns:
        CountCache stored under data/ in the project root.
    """
    project_root = Path(__file__).parent.parent.parent
    db_path = project_root / "data" / "counts.db"

    config = CountCacheConfig(db_path=db_path)
    return CountCache(config=config)
