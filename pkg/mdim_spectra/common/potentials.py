"""Locally constant potentials and Birkhoff averages.

A potential of depth r is a table over the m^r words of length r, listed in
lexicographic order, with exact rational values so level-window membership
never depends on floating point rounding.
"""

import hashlib
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from numpy.typing import NDArray

from mdim_spectra.common.errors import DepthError, DomainError
from mdim_spectra.common.systems import GridFullShift, Point, SystemSpec, WordArray, all_words, validate_point

# Largest m^r for which Var(phi, eps) is computed over all cylinder pairs.
_VARIATION_PAIR_CAP = 2048


def exact(value: float | int | str | Fraction) -> Fraction:
    """Convert a user supplied number to a fraction using its decimal spelling."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class Potential:
    """Locally constant potential phi(x) = table[x_1 ... x_r].

    Attributes:
        depth: Number of leading coordinates the value depends on.
        alphabet_size: Alphabet size m of the owning system.
        table: Exact values of the m^r words in lexicographic order.
        name: Label used in reports.
    """

    depth: int
    alphabet_size: int
    table: tuple[Fraction, ...]
    name: str = "phi"

    def __post_init__(self) -> None:
        """Check that the table is total."""
        if self.depth < 1:
            raise DomainError(f"potential depth must be positive, got {self.depth}")
        expected = self.alphabet_size**self.depth
        if len(self.table) != expected:
            raise DomainError(f"potential table needs {expected} values, got {len(self.table)}")

    @classmethod
    def first_coordinate(cls, sys: SystemSpec) -> "Potential":
        """phi(x) = x_1, the canonical potential on grid alphabets."""
        values = tuple(sys.exact_letter_value(i) for i in range(sys.alphabet_size))
        return cls(depth=1, alphabet_size=sys.alphabet_size, table=values, name="first-coordinate")

    @classmethod
    def constant(cls, sys: SystemSpec, value: float | str | Fraction, *, depth: int = 1) -> "Potential":
        """phi identically equal to ``value``."""
        c = exact(value)
        return cls(
            depth=depth,
            alphabet_size=sys.alphabet_size,
            table=(c,) * sys.alphabet_size**depth,
            name=f"constant({c})",
        )

    @classmethod
    def from_values(
        cls, sys: SystemSpec, *, depth: int, values: Sequence[float | int | str | Fraction], name: str = "phi"
    ) -> "Potential":
        """Build a potential from values listed in lexicographic word order."""
        return cls(
            depth=depth, alphabet_size=sys.alphabet_size, table=tuple(exact(v) for v in values), name=name
        )

    @property
    def min_value(self) -> Fraction:
        """Smallest table value."""
        return min(self.table)

    @property
    def max_value(self) -> Fraction:
        """Largest table value."""
        return max(self.table)

    @property
    def sup_norm(self) -> float:
        """Sup norm of the potential."""
        return float(max(abs(v) for v in self.table))

    @property
    def is_constant(self) -> bool:
        """Whether every word has the same value."""
        return self.min_value == self.max_value

    @cached_property
    def float_table(self) -> NDArray[np.float64]:
        """Table values as floats."""
        return np.array([float(v) for v in self.table], dtype=np.float64)

    @cached_property
    def denominator(self) -> int:
        """Least common denominator of all table values."""
        return math.lcm(*(v.denominator for v in self.table))

    @cached_property
    def integer_table(self) -> NDArray[np.int64]:
        """Table values multiplied by ``denominator``."""
        return np.array([int(v * self.denominator) for v in self.table], dtype=np.int64)

    @property
    def key(self) -> str:
        """Short content hash used by caches."""
        text = f"{self.name}|{self.depth}|{','.join(str(v) for v in self.table)}"
        return hashlib.sha1(text.encode("utf-8"), usedforsecurity=False).hexdigest()[:12]

    def word_index(self, symbols: Sequence[int]) -> int:
        """Table index of a length-r word."""
        index = 0
        for symbol in symbols:
            index = index * self.alphabet_size + symbol
        return index

    def value_at(self, symbols: Sequence[int]) -> Fraction:
        """Value on the cylinder of the given length-r word."""
        return self.table[self.word_index(symbols)]

    def variation(self, sys: SystemSpec, epsilon: float) -> float:
        """Var(phi, eps): largest |phi(x) - phi(y)| over pairs with d(x, y) < eps.

        Two cylinders contain points closer than eps exactly when the distance of
        their defining words (with identical tails) is below eps. Large tables
        fall back to the oscillation max - min.
        """
        _check_alphabet(sys, self)
        if self.alphabet_size**self.depth > _VARIATION_PAIR_CAP:
            return float(self.max_value - self.min_value)

        words = all_words(self.alphabet_size, self.depth)
        values = sys.letter_values[words]
        if isinstance(sys, GridFullShift):
            weights = 0.5 ** np.arange(1, self.depth + 1)
            gaps = np.abs(values[:, np.newaxis, :] - values[np.newaxis, :, :]) @ weights
        else:
            used = min(self.depth, sys.ell_trunc)
            nu = sys.weights(used)
            powered = np.abs(values[:, np.newaxis, :used] - values[np.newaxis, :, :used]) ** sys.p
            gaps = (powered @ nu) ** (1.0 / sys.p)
        close = gaps < epsilon
        spread = np.abs(self.float_table[:, np.newaxis] - self.float_table[np.newaxis, :])
        return float(spread[close].max())


def _check_alphabet(sys: SystemSpec, phi: Potential) -> None:
    if phi.alphabet_size != sys.alphabet_size:
        raise DomainError(
            f"potential '{phi.name}' is tabulated for {phi.alphabet_size} letters, system has {sys.alphabet_size}"
        )


def birkhoff_sum(sys: SystemSpec, phi: Potential, x: Point, n: int) -> Fraction:
    """Exact Birkhoff sum of phi over f^0 x, ..., f^(n-1) x.

    Raises:
        DepthError: If ``x`` stores fewer than n + r - 1 coordinates.
    """
    _check_alphabet(sys, phi)
    validate_point(sys, x)
    if n < 1:
        raise DomainError(f"orbit length must be positive, got {n}")
    required = n + phi.depth - 1
    if x.depth < required:
        raise DepthError(f"Birkhoff average of length {n} needs depth {required}, point stores {x.depth}")
    return sum((phi.value_at(x.word[j : j + phi.depth]) for j in range(n)), start=Fraction(0))


def birkhoff_average(sys: SystemSpec, phi: Potential, x: Point, n: int) -> float:
    """Birkhoff average (1/n) sum_{j<n} phi(f^j x)."""
    return float(birkhoff_sum(sys, phi, x, n) / n)


def birkhoff_sums_scaled(phi: Potential, words: WordArray, n: int) -> NDArray[np.int64]:
    """Birkhoff sums of every row, multiplied by ``phi.denominator``.

    Raises:
        DepthError: If the words are narrower than n + r - 1.
    """
    required = n + phi.depth - 1
    if words.shape[1] < required:
        raise DepthError(f"Birkhoff sums of length {n} need width {required}, got {words.shape[1]}")
    totals = np.zeros(words.shape[0], dtype=np.int64)
    for j in range(n):
        index = np.zeros(words.shape[0], dtype=np.int64)
        for t in range(phi.depth):
            index = index * phi.alphabet_size + words[:, j + t]
        totals += phi.integer_table[index]
    return totals
