"""Exception hierarchy shared by every estimator, oracle and the command line."""

from typing import Any


class MdimSpectraError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(MdimSpectraError):
    """Invalid or incomplete experiment configuration."""

    def __init__(self, message: str, *, line: int | None = None, key: str | None = None) -> None:
        """Initialize the error.

        Args:
            message: Human readable description.
            line: 1-based line of the offending config entry, if known.
            key: Config key involved, if known.
        """
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class BudgetError(MdimSpectraError):
    """A computation would exceed its configured size cap."""

    def __init__(self, message: str, *, required: int, cap: int, partial: Any = None) -> None:
        """Initialize the error.

        Args:
            message: Human readable description.
            required: Cap value that would let the computation run.
            cap: Cap that was in force.
            partial: Partial result table computed before the cap was hit.
        """
        self.required = required
        self.cap = cap
        self.partial = partial
        super().__init__(f"{message} (required cap {required}, configured {cap})")


class DepthError(MdimSpectraError):
    """A point does not store enough coordinates for the requested query."""


class DomainError(MdimSpectraError):
    """An argument lies outside the domain of an operation."""


class EmptyLevelError(DomainError):
    """A Birkhoff level window holds no candidate point."""

    def __init__(self, message: str, *, nearest_alpha: float | None = None) -> None:
        """Initialize the error.

        Args:
            message: Human readable description.
            nearest_alpha: Closest average that is achievable at the queried length.
        """
        self.nearest_alpha = nearest_alpha
        if nearest_alpha is not None:
            message = f"{message}; nearest achievable alpha is {nearest_alpha:.6g}"
        super().__init__(message)


class ContractError(MdimSpectraError):
    """A construction violated one of its stated invariants."""


class InconclusiveError(MdimSpectraError):
    """A critical exponent could not be bracketed on the supplied grid."""

    def __init__(self, message: str, *, table: list[tuple[float, float, bool]]) -> None:
        """Initialize the error.

        Args:
            message: Human readable description.
            table: Rows of (s, tail trend, diverges) evaluated before giving up.
        """
        self.table = table
        super().__init__(message)
