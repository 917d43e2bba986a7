"""Lock file guarding an output directory against concurrent runs."""

import logging
import os
from pathlib import Path
from types import TracebackType

from mdim_spectra.common.errors import ConfigError

logger = logging.getLogger(__name__)

LOCK_NAME = ".mdim-spectra.lock"


class OutputLock:
    """Exclusive lock on an output directory, held for the lifetime of a run.

    The lock is a file created with O_EXCL that stores the owner's pid; it is
    removed on release.
    """

    def __init__(self, *, out_dir: Path) -> None:
        """Initialize the lock.

        Args:
            out_dir: Directory the run writes into.
        """
        self.out_dir = out_dir
        self.path = out_dir / LOCK_NAME
        self._held = False

    def acquire(self) -> None:
        """Create the lock file.

        Raises:
            ConfigError: If another run holds the lock.
        """
        self.out_dir.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError as e:
            owner = self.path.read_text(encoding="utf-8").strip() if self.path.exists() else "?"
            raise ConfigError(f"output directory {self.out_dir} is locked by pid {owner} ({self.path})") from e
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(f"{os.getpid()}\n")
        self._held = True
        logger.debug("acquired %s", self.path)

    def release(self) -> None:
        """Remove the lock file if this instance holds it."""
        if self._held:
            self.path.unlink(missing_ok=True)
            self._held = False
            logger.debug("released %s", self.path)

    @property
    def held(self) -> bool:
        """Whether this instance holds the lock."""
        return self._held

    def __enter__(self) -> "OutputLock":
        """Acquire on entry."""
        self.acquire()
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        traceback: TracebackType | None,
    ) -> None:
        """Release on exit."""
        self.release()
