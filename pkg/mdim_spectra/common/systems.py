"""Representable dynamical systems, their metrics and the shift map.

Two systems are supported:

- ``GridFullShift``: the one-sided full shift over the grid alphabet
  {0, 1/(m-1), ..., 1} with metric d(x, y) = sum_n 2^-n |x_n - y_n|.
- ``WeightedShiftCompact``: the backward shift on the compact set
  K = {|x_n| <= 1} of the weighted space l^p(nu), realised on a per-coordinate
  grid of [-1, 1] and truncated to ``ell_trunc`` coordinates.

Points store a finite word of alphabet indices together with a tail convention
that resolves every coordinate past the stored depth. Word arrays (numpy, one
row per word, equal widths) always use the pad-with-index-0 convention.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import ClassVar

import numpy as np
from numpy.typing import NDArray
from scipy.special import zeta

from mdim_spectra.common.errors import DepthError, DomainError

logger = logging.getLogger(__name__)

WordArray = NDArray[np.int64]


class TailConvention(Enum):
    """How coordinates past the stored depth are resolved."""

    REPEAT_LAST = "repeat-last"
    PAD_ZERO = "pad-0"


class SystemKind(Enum):
    """Kinds of representable systems."""

    GRID_FULL_SHIFT = "grid-full-shift"
    WEIGHTED_SHIFT = "weighted-shift"


class NuForm(Enum):
    """Closed forms for the weight sequence of the weighted shift."""

    GEOMETRIC = "geometric"
    POLYNOMIAL = "polynomial"


@dataclass(frozen=True)
class Point:
    """A finite-depth representation of a one-sided sequence.

    Attributes:
        word: Explicitly stored alphabet indices, first coordinate first.
        tail: Convention resolving coordinates past ``depth``.
    """

    word: tuple[int, ...]
    tail: TailConvention = TailConvention.PAD_ZERO

    def __post_init__(self) -> None:
        """Reject empty words."""
        if not self.word:
            raise DomainError("a point stores at least one coordinate")

    @property
    def depth(self) -> int:
        """Number of explicitly stored coordinates."""
        return len(self.word)

    @property
    def tail_symbol(self) -> int:
        """Symbol repeated forever past the stored depth."""
        return self.word[-1] if self.tail is TailConvention.REPEAT_LAST else 0

    def symbol_at(self, index: int) -> int:
        """Return the symbol at a 0-based coordinate, resolving the tail.

        Args:
            index: 0-based coordinate position.

        Returns:
            Alphabet index stored or implied at that position.
        """
        if index < self.depth:
            return self.word[index]
        return self.tail_symbol

    def extended(self, length: int) -> tuple[int, ...]:
        """Return the first ``length`` symbols, resolving the tail where needed."""
        if length <= self.depth:
            return self.word[:length]
        return self.word + (self.tail_symbol,) * (length - self.depth)


@dataclass(frozen=True)
class GridFullShift:
    """Full shift over the equally spaced alphabet {0, 1/(m-1), ..., 1}.

    ``m = 1`` is accepted as the degenerate one-point space.
    """

    m: int

    kind: ClassVar[SystemKind] = SystemKind.GRID_FULL_SHIFT

    def __post_init__(self) -> None:
        """Validate the alphabet size."""
        if self.m < 1:
            raise DomainError(f"alphabet size must be positive, got {self.m}")

    @property
    def alphabet_size(self) -> int:
        """Number of letters."""
        return self.m

    @cached_property
    def letter_values(self) -> NDArray[np.float64]:
        """Real value of every letter, indexed by alphabet index."""
        if self.m == 1:
            return np.zeros(1)
        return np.arange(self.m, dtype=np.float64) / (self.m - 1)

    def exact_letter_value(self, index: int) -> Fraction:
        """Rational value of a letter."""
        if self.m == 1:
            return Fraction(0)
        return Fraction(index, self.m - 1)

    @property
    def gap(self) -> float:
        """Spacing g between adjacent letters (infinite for a single letter)."""
        return math.inf if self.m == 1 else 1.0 / (self.m - 1)

    @property
    def coordinate_span(self) -> float:
        """Largest distance between two letters."""
        return 0.0 if self.m == 1 else 1.0

    @property
    def diameter(self) -> float:
        """Diameter of the whole space."""
        return self.coordinate_span

    def tail_diameter(self, depth: int) -> float:
        """Diameter of a cylinder fixing the first ``depth`` coordinates."""
        return self.diameter * 2.0**-depth

    @property
    def key(self) -> str:
        """Stable identifier used by caches and reports."""
        return f"{self.kind.value}:m={self.m}"


@dataclass(frozen=True)
class WeightedShiftCompact:
    """Backward shift on K = {|x_n| <= 1} in l^p(nu), on a coordinate grid of [-1, 1]."""

    nu_form: NuForm = NuForm.GEOMETRIC
    nu_param: float = 0.5
    p: float = 1.0
    ell_trunc: int = 8
    grid_m: int = 3

    kind: ClassVar[SystemKind] = SystemKind.WEIGHTED_SHIFT

    def __post_init__(self) -> None:
        """Validate the weight form and truncation parameters."""
        if self.p < 1:
            raise DomainError(f"p must be at least 1, got {self.p}")
        if self.ell_trunc < 1:
            raise DomainError(f"ell_trunc must be positive, got {self.ell_trunc}")
        if self.grid_m < 2:
            raise DomainError(f"grid_m must be at least 2, got {self.grid_m}")
        if self.nu_form is NuForm.GEOMETRIC and not 0 < self.nu_param < 1:
            raise DomainError(f"geometric weights need 0 < ratio < 1, got {self.nu_param}")
        if self.nu_form is NuForm.POLYNOMIAL and self.nu_param <= 1:
            raise DomainError(f"polynomial weights need exponent > 1, got {self.nu_param}")

    @property
    def alphabet_size(self) -> int:
        """Number of grid values per coordinate."""
        return self.grid_m

    @cached_property
    def letter_values(self) -> NDArray[np.float64]:
        """Grid values of a coordinate, indexed by alphabet index."""
        return np.linspace(-1.0, 1.0, self.grid_m)

    def exact_letter_value(self, index: int) -> Fraction:
        """Rational grid value of a coordinate."""
        return Fraction(2 * index, self.grid_m - 1) - 1

    def nu(self, k: int) -> float:
        """Weight of coordinate ``k`` (1-based)."""
        if self.nu_form is NuForm.GEOMETRIC:
            return float(self.nu_param**k)
        return float(k ** (-self.nu_param))

    def weights(self, count: int) -> NDArray[np.float64]:
        """Weights of coordinates 1..count."""
        return np.array([self.nu(k) for k in range(1, count + 1)], dtype=np.float64)

    @property
    def nu_total(self) -> float:
        """Sum of all weights."""
        if self.nu_form is NuForm.GEOMETRIC:
            return self.nu_param / (1.0 - self.nu_param)
        return float(zeta(self.nu_param, 1.0))

    def nu_tail(self, ell: int) -> float:
        """Sum of the weights of coordinates strictly after ``ell``."""
        if self.nu_form is NuForm.GEOMETRIC:
            return float(self.nu_param ** (ell + 1) / (1.0 - self.nu_param))
        return float(zeta(self.nu_param, ell + 1.0))

    @property
    def norm_bound(self) -> float:
        """M = (sum nu_k)^(1/p), the l^p(nu) norm bound of the cube."""
        return self.nu_total ** (1.0 / self.p)

    @property
    def coordinate_span(self) -> float:
        """Largest distance between two coordinate values."""
        return 2.0

    @property
    def gap(self) -> float:
        """Spacing between adjacent coordinate grid values."""
        return 2.0 / (self.grid_m - 1)

    @property
    def diameter(self) -> float:
        """Diameter of the truncated compact set."""
        return self.tail_diameter(0)

    def tail_diameter(self, depth: int) -> float:
        """Largest truncated distance between points agreeing on ``depth`` coordinates."""
        if depth >= self.ell_trunc:
            return 0.0
        mass = float(self.weights(self.ell_trunc)[depth:].sum())
        return float((self.coordinate_span**self.p * mass) ** (1.0 / self.p))

    @property
    def key(self) -> str:
        """Stable identifier used by caches and reports."""
        return (
            f"{self.kind.value}:nu={self.nu_form.value}({self.nu_param!r}),p={self.p!r},"
            f"ell={self.ell_trunc},grid={self.grid_m}"
        )


SystemSpec = GridFullShift | WeightedShiftCompact


def _check_system(sys: object) -> None:
    if not isinstance(sys, GridFullShift | WeightedShiftCompact):
        raise TypeError(f"unsupported system kind: {type(sys).__name__}")


def validate_point(sys: SystemSpec, x: Point) -> None:
    """Ensure every stored index is a valid alphabet index of ``sys``.

    Raises:
        DomainError: If an index is out of range.
    """
    _check_system(sys)
    if min(x.word) < 0 or max(x.word) >= sys.alphabet_size:
        raise DomainError(f"point {x.word} has indices outside the alphabet of size {sys.alphabet_size}")


def apply_shift(sys: SystemSpec, x: Point) -> Point:
    """Drop the first coordinate of ``x``.

    Raises:
        DepthError: If ``x`` stores a single coordinate.
    """
    validate_point(sys, x)
    if x.depth == 1:
        raise DepthError("shift underflow: point of depth 1 cannot be shifted, truncate deeper")
    return Point(word=x.word[1:], tail=x.tail)


def distance(sys: SystemSpec, x: Point, y: Point) -> float:
    """Base metric d(x, y).

    Both tail conventions are eventually constant, so the grid distance is
    evaluated exactly: the stored coordinates plus the closed-form geometric tail.
    The weighted distance uses coordinates 1..ell_trunc.

    Raises:
        TypeError: If ``sys`` is not a supported system.
        DomainError: If a point holds invalid indices.
    """
    validate_point(sys, x)
    validate_point(sys, y)
    values = sys.letter_values
    if isinstance(sys, GridFullShift):
        depth = max(x.depth, y.depth)
        xs = np.array(x.extended(depth))
        ys = np.array(y.extended(depth))
        terms = np.abs(values[xs] - values[ys]) * 0.5 ** np.arange(1, depth + 1)
        tail_term = abs(values[x.tail_symbol] - values[y.tail_symbol]) * 2.0**-depth
        return math.fsum([*terms.tolist(), float(tail_term)])

    xs = np.array(x.extended(sys.ell_trunc))
    ys = np.array(y.extended(sys.ell_trunc))
    powered = np.abs(values[xs] - values[ys]) ** sys.p
    return float(np.dot(powered, sys.weights(sys.ell_trunc)) ** (1.0 / sys.p))


def distance_tail_bound(sys: SystemSpec, x: Point, y: Point) -> float:
    """Largest change of d(x, y) if the tails were replaced by arbitrary coordinates."""
    _check_system(sys)
    return sys.tail_diameter(min(x.depth, y.depth))


def truncation_depth(sys: SystemSpec, epsilon: float, n: int = 1) -> int:
    """Coordinates needed past ``n`` so that the rest moves any d_n value by at most epsilon/10.

    Args:
        sys: System whose metric is truncated.
        epsilon: Query scale.
        n: Orbit length (the bound does not depend on it for these metrics).

    Returns:
        Smallest L >= 0 with tail diameter past L at most epsilon/10.

    Raises:
        DomainError: If ``epsilon`` is not positive.
    """
    _check_system(sys)
    if epsilon <= 0:
        raise DomainError(f"scale must be positive, got {epsilon}")
    budget = epsilon / 10.0
    depth = 0
    while sys.tail_diameter(depth) > budget:
        depth += 1
    return depth


def dynamical_distance(
    sys: SystemSpec, x: Point, y: Point, n: int, *, accuracy: float | None = None
) -> float:
    """Dynamical metric d_n(x, y) = max over 0 <= j < n of d(f^j x, f^j y).

    Args:
        sys: System.
        x: First point.
        y: Second point.
        n: Orbit length, at least 1.
        accuracy: When given, both points must also store the truncation depth for this scale.

    Raises:
        DomainError: If ``n`` is not positive.
        DepthError: If a point stores too few coordinates.
    """
    if n < 1:
        raise DomainError(f"orbit length must be positive, got {n}")
    required = n + (truncation_depth(sys, accuracy, n) if accuracy is not None else 0)
    if min(x.depth, y.depth) < required:
        raise DepthError(f"d_{n} needs depth {required}, points store {x.depth} and {y.depth}")

    best = distance(sys, x, y)
    for _ in range(n - 1):
        x = apply_shift(sys, x)
        y = apply_shift(sys, y)
        best = max(best, distance(sys, x, y))
    return best


def all_words(alphabet_size: int, length: int) -> WordArray:
    """Every word of the given length in lexicographic order."""
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(itertools.product(range(alphabet_size), repeat=length)), dtype=np.int64)


def points_to_words(points: list[Point], width: int) -> WordArray:
    """Stack points into a pad-0 word array of the given width."""
    return np.array([point.extended(width) for point in points], dtype=np.int64).reshape(len(points), width)


def words_to_points(words: WordArray) -> list[Point]:
    """Convert a word array to pad-0 points."""
    return [Point(word=tuple(int(s) for s in row)) for row in words]


def orbit_distances(sys: SystemSpec, words: WordArray, word: NDArray[np.int64], n: int) -> NDArray[np.float64]:
    """Vectorised d_n from every row of ``words`` to ``word``.

    All words are pad-0 and share one width; coordinates past the width agree.

    Raises:
        DepthError: If the width is smaller than ``n``.
    """
    _check_system(sys)
    values = sys.letter_values
    return value_orbit_distances(sys, values[words], values[word], n)


def value_orbit_distances(
    sys: SystemSpec, points: NDArray[np.float64], point: NDArray[np.float64], n: int
) -> NDArray[np.float64]:
    """Vectorised d_n between real coordinate vectors (rows of ``points``) and ``point``.

    Coordinates past the common width are taken to agree.
    """
    _check_system(sys)
    width = points.shape[1]
    if width < n:
        raise DepthError(f"d_{n} needs words of width at least {n}, got {width}")
    diff = np.abs(points - point[np.newaxis, :])
    best = np.zeros(points.shape[0], dtype=np.float64)

    if isinstance(sys, GridFullShift):
        weights = 0.5 ** np.arange(1, width + 1)
        for j in range(n):
            np.maximum(best, diff[:, j:] @ weights[: width - j], out=best)
        return best

    powered = diff**sys.p
    nu = sys.weights(sys.ell_trunc)
    for j in range(n):
        window = powered[:, j : j + sys.ell_trunc]
        np.maximum(best, (window @ nu[: window.shape[1]]) ** (1.0 / sys.p), out=best)
    return best


def min_pairwise_distance(sys: SystemSpec, words: WordArray, n: int) -> float:
    """Smallest d_n over distinct rows (infinite for fewer than two rows)."""
    best = math.inf
    for i in range(words.shape[0] - 1):
        best = min(best, float(orbit_distances(sys, words[i + 1 :], words[i], n).min()))
    return best
