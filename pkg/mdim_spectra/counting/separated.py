"""(n, eps)-separated sets, spanning covers and the counts built on them.

Candidates are the pad-0 words of length n + L, where L is the truncation depth
for eps, so every point of the space lies within eps/10 of a candidate. The
greedy scan keeps a word iff it is more than eps away (in d_n) from every word
kept before it, which makes the result separated and eps-spanning among the
candidates.
"""

import logging
import math
import time
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from mdim_spectra.common.errors import BudgetError, DomainError
from mdim_spectra.common.potentials import birkhoff_sums_scaled
from mdim_spectra.common.systems import (
    GridFullShift,
    Point,
    SystemSpec,
    WordArray,
    all_words,
    orbit_distances,
    points_to_words,
    truncation_depth,
    words_to_points,
)
from mdim_spectra.counting.windows import LevelWindow
from mdim_spectra.database.models import CountCache, CountRecord
from mdim_spectra.oracles.dp import DEFAULT_DP_CAP, level_count_dp
from mdim_spectra.utils.reports import write_csv

logger = logging.getLogger(__name__)

DEFAULT_MAX_CANDIDATES = 4096
DEFAULT_EXACT_CAP = 24

COUNT_CSV_HEADER = (
    "kind",
    "m",
    "n",
    "epsilon",
    "alpha",
    "delta",
    "count",
    "certificate",
    "lower_bound",
    "regime",
    "elapsed_ms",
)


class Certificate(Enum):
    """How a separated set's cardinality is certified."""

    GREEDY_MAXIMAL = "greedy-maximal"
    EXACT_MAXIMUM = "exact-maximum"
    EXPLICIT_GRID = "explicit-grid"


class CountRegime(Enum):
    """Path a count was obtained through."""

    TRIVIAL = "trivial"
    FACTORED = "factored"
    ENUMERATED = "enumerated"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class SeparatedSet:
    """Points pairwise more than epsilon apart in d_n.

    Attributes:
        points: Members in scan order.
        n: Orbit length of the dynamical metric.
        epsilon: Separation scale.
        certificate: How maximality or maximum cardinality is certified.
        lower_bound: Set when the candidates were sampled rather than enumerated.
    """

    points: tuple[Point, ...]
    n: int
    epsilon: float
    certificate: Certificate
    lower_bound: bool = False

    @property
    def count(self) -> int:
        """Number of members."""
        return len(self.points)

    def words(self) -> WordArray:
        """Members as a pad-0 word array of their largest depth."""
        width = max((p.depth for p in self.points), default=self.n)
        return points_to_words(list(self.points), width)


def _check_scale(epsilon: float, n: int) -> None:
    if epsilon <= 0:
        raise DomainError(f"scale must be positive, got {epsilon}")
    if n < 1:
        raise DomainError(f"orbit length must be positive, got {n}")


def candidate_width(sys: SystemSpec, n: int, epsilon: float, *, tail_depth: int | None = None) -> int:
    """Word length n + L of the candidate family at (n, epsilon)."""
    _check_scale(epsilon, n)
    return n + (truncation_depth(sys, epsilon, n) if tail_depth is None else tail_depth)


def candidate_words(
    sys: SystemSpec,
    n: int,
    epsilon: float,
    *,
    cap: int = DEFAULT_MAX_CANDIDATES,
    tail_depth: int | None = None,
) -> WordArray:
    """All candidate words in lexicographic order.

    Raises:
        BudgetError: If m^(n+L) exceeds ``cap``.
    """
    width = candidate_width(sys, n, epsilon, tail_depth=tail_depth)
    required = sys.alphabet_size**width
    if required > cap:
        raise BudgetError(f"enumerating {sys.alphabet_size}^{width} candidate words", required=required, cap=cap)
    return all_words(sys.alphabet_size, width)


def enumerate_candidates(
    sys: SystemSpec,
    n: int,
    epsilon: float,
    *,
    cap: int = DEFAULT_MAX_CANDIDATES,
    tail_depth: int | None = None,
) -> list[Point]:
    """Every truncated word of length n + L with a pad-0 tail, lexicographically.

    Args:
        sys: System.
        n: Orbit length.
        epsilon: Scale; fixes L = truncation_depth(sys, epsilon) unless ``tail_depth`` is given.
        cap: Largest candidate family allowed.
        tail_depth: Explicit L.

    Raises:
        BudgetError: If the family exceeds ``cap``; the error names the required cap.
    """
    return words_to_points(candidate_words(sys, n, epsilon, cap=cap, tail_depth=tail_depth))


def sample_words(
    sys: SystemSpec, n: int, epsilon: float, *, size: int, seed: int, tail_depth: int | None = None
) -> WordArray:
    """Distinct uniformly drawn candidate words, sorted lexicographically."""
    width = candidate_width(sys, n, epsilon, tail_depth=tail_depth)
    rng = np.random.default_rng(seed)
    drawn = rng.integers(0, sys.alphabet_size, size=(size, width), dtype=np.int64)
    return np.unique(drawn, axis=0)


def sample_candidates(
    sys: SystemSpec, n: int, epsilon: float, *, size: int, seed: int, tail_depth: int | None = None
) -> list[Point]:
    """Monte-Carlo candidate family; counts built on it are lower bounds."""
    return words_to_points(sample_words(sys, n, epsilon, size=size, seed=seed, tail_depth=tail_depth))


def _lexicographic_order(words: WordArray) -> NDArray[np.intp]:
    if words.shape[1] == 0:
        return np.arange(words.shape[0])
    return np.lexsort(words.T[::-1])


def greedy_separated_rows(sys: SystemSpec, words: WordArray, n: int, epsilon: float) -> NDArray[np.intp]:
    """Rows kept by the greedy scan over ``words`` in their given order.

    A kept row deactivates every later row within d_n <= epsilon of it.
    """
    covered = np.zeros(words.shape[0], dtype=np.bool_)
    kept: list[int] = []
    for i in range(words.shape[0]):
        if covered[i]:
            continue
        kept.append(i)
        rest = np.flatnonzero(~covered[i + 1 :]) + i + 1
        if rest.size:
            close = orbit_distances(sys, words[rest], words[i], n) <= epsilon
            covered[rest[close]] = True
    return np.array(kept, dtype=np.intp)


def greedy_maximal_separated(
    sys: SystemSpec, candidates: Sequence[Point], n: int, epsilon: float, *, lower_bound: bool = False
) -> SeparatedSet:
    """Scan candidates lexicographically and keep those more than epsilon from all kept ones.

    The result is inclusion-maximal among the candidates.

    Raises:
        DomainError: If ``candidates`` is empty.
    """
    _check_scale(epsilon, n)
    if not candidates:
        raise DomainError("greedy separation needs at least one candidate")
    width = max(max(p.depth for p in candidates), n)
    words = points_to_words(list(candidates), width)
    order = _lexicographic_order(words)
    kept = order[greedy_separated_rows(sys, words[order], n, epsilon)]
    return SeparatedSet(
        points=tuple(candidates[int(i)] for i in kept),
        n=n,
        epsilon=epsilon,
        certificate=Certificate.GREEDY_MAXIMAL,
        lower_bound=lower_bound,
    )


def _conflict_masks(sys: SystemSpec, words: WordArray, n: int, epsilon: float) -> list[int]:
    masks = [0] * words.shape[0]
    for i in range(words.shape[0]):
        close = orbit_distances(sys, words, words[i], n) <= epsilon
        close[i] = False
        masks[i] = sum(1 << int(j) for j in np.flatnonzero(close))
    return masks


def _maximum_independent_set(masks: list[int]) -> int:
    best = 0

    def search(free: int, chosen: int) -> None:
        nonlocal best
        if free == 0:
            if chosen.bit_count() > best.bit_count():
                best = chosen
            return
        if chosen.bit_count() + free.bit_count() <= best.bit_count():
            return
        v = (free & -free).bit_length() - 1
        bit = 1 << v
        search(free & ~masks[v] & ~bit, chosen | bit)
        search(free & ~bit, chosen)

    search((1 << len(masks)) - 1, 0)
    return best


def exact_max_separated(
    sys: SystemSpec,
    candidates: Sequence[Point],
    n: int,
    epsilon: float,
    *,
    cap: int = DEFAULT_EXACT_CAP,
) -> SeparatedSet:
    """Maximum-cardinality separated subset of the candidates.

    Solves maximum independent set in the graph joining candidates with
    d_n <= epsilon by branch and bound.

    Raises:
        BudgetError: If there are more than ``cap`` candidates.
    """
    _check_scale(epsilon, n)
    if len(candidates) > cap:
        raise BudgetError("exact separated search over too many candidates", required=len(candidates), cap=cap)
    if not candidates:
        return SeparatedSet(points=(), n=n, epsilon=epsilon, certificate=Certificate.EXACT_MAXIMUM)
    width = max(max(p.depth for p in candidates), n)
    words = points_to_words(list(candidates), width)
    order = _lexicographic_order(words)
    chosen = _maximum_independent_set(_conflict_masks(sys, words[order], n, epsilon))
    kept = [int(order[i]) for i in range(len(candidates)) if chosen >> i & 1]
    return SeparatedSet(
        points=tuple(candidates[i] for i in kept), n=n, epsilon=epsilon, certificate=Certificate.EXACT_MAXIMUM
    )


def _window_width(sys: SystemSpec, window: LevelWindow, epsilon: float) -> int:
    return window.n + max(truncation_depth(sys, epsilon, window.n), window.phi.depth - 1)


def filter_window(window: LevelWindow, words: WordArray) -> WordArray:
    """Rows whose length-n Birkhoff average lies in the window."""
    if words.shape[0] == 0:
        return words
    return words[window.contains_scaled(birkhoff_sums_scaled(window.phi, words, window.n))]


def window_candidates(
    sys: SystemSpec, window: LevelWindow, epsilon: float, *, cap: int = DEFAULT_MAX_CANDIDATES
) -> WordArray:
    """Candidate words inside P(alpha, delta, n), lexicographically."""
    width = _window_width(sys, window, epsilon)
    words = candidate_words(sys, window.n, epsilon, cap=cap, tail_depth=width - window.n)
    return filter_window(window, words)


def M_count(  # noqa: N802
    sys: SystemSpec,
    window: LevelWindow,
    epsilon: float,
    *,
    cap: int = DEFAULT_MAX_CANDIDATES,
    exact: bool = False,
) -> SeparatedSet:
    """Maximal separated subset of the level window P(alpha, delta, n).

    An empty window yields an empty set, meaning alpha is not reachable at this
    (n, delta).

    Args:
        sys: System.
        window: Level window.
        epsilon: Separation scale.
        cap: Largest candidate family allowed.
        exact: Use the exact maximum search when the window holds few enough candidates.
    """
    words = window_candidates(sys, window, epsilon, cap=cap)
    points = words_to_points(words)
    if not points:
        return SeparatedSet(points=(), n=window.n, epsilon=epsilon, certificate=Certificate.GREEDY_MAXIMAL)
    if exact and len(points) <= DEFAULT_EXACT_CAP:
        return exact_max_separated(sys, points, window.n, epsilon)
    kept = greedy_separated_rows(sys, words, window.n, epsilon)
    return SeparatedSet(
        points=tuple(points[int(i)] for i in kept),
        n=window.n,
        epsilon=epsilon,
        certificate=Certificate.GREEDY_MAXIMAL,
    )


def cover_rows(sys: SystemSpec, words: WordArray, n: int, epsilon: float) -> NDArray[np.intp]:
    """Centres of a cover of ``words`` by open (n, epsilon)-balls centred on rows.

    Starts from the greedy separated rows, adds every row left outside the open
    balls, then drops centres (latest first) whose rows stay covered without them.
    """
    if words.shape[0] == 0:
        return np.zeros(0, dtype=np.intp)
    centres = list(greedy_separated_rows(sys, words, n, epsilon))
    inside = np.array([orbit_distances(sys, words, words[c], n) < epsilon for c in centres])
    uncovered = np.flatnonzero(~inside.any(axis=0))
    if uncovered.size:
        extra = np.array([orbit_distances(sys, words, words[c], n) < epsilon for c in uncovered])
        centres.extend(int(c) for c in uncovered)
        inside = np.vstack([inside, extra])

    multiplicity = inside.sum(axis=0)
    keep = np.ones(len(centres), dtype=np.bool_)
    for index in range(len(centres) - 1, -1, -1):
        if np.all(multiplicity[inside[index]] >= 2):
            keep[index] = False
            multiplicity -= inside[index]
    return np.array(sorted(c for c, k in zip(centres, keep, strict=True) if k), dtype=np.intp)


def N_count(  # noqa: N802
    sys: SystemSpec, window: LevelWindow, epsilon: float, *, cap: int = DEFAULT_MAX_CANDIDATES
) -> int:
    """Size of a cover of P(alpha, delta, n) by open (n, epsilon)-balls.

    The value is an upper bound on the minimal cover cardinality N(alpha, delta, n, eps).
    """
    words = window_candidates(sys, window, epsilon, cap=cap)
    return int(cover_rows(sys, words, window.n, epsilon).size)


@dataclass(frozen=True)
class SandwichCheck:
    """N(eps) <= M(eps) <= N(eps/2) evaluated on one candidate family."""

    n_eps: int
    m_eps: int
    n_half: int

    @property
    def holds(self) -> bool:
        """Whether both inequalities hold."""
        return self.n_eps <= self.m_eps <= self.n_half


def check_sandwich(
    sys: SystemSpec, window: LevelWindow, epsilon: float, *, cap: int = DEFAULT_MAX_CANDIDATES
) -> SandwichCheck:
    """Evaluate the separated/spanning sandwich at eps and eps/2.

    All three counts use the candidate family resolving eps/2.
    """
    words = window_candidates(sys, window, epsilon / 2.0, cap=cap)
    n = window.n
    return SandwichCheck(
        n_eps=int(cover_rows(sys, words, n, epsilon).size),
        m_eps=int(greedy_separated_rows(sys, words, n, epsilon).size),
        n_half=int(cover_rows(sys, words, n, epsilon / 2.0).size),
    )


@dataclass(frozen=True)
class CountResult:
    """One separated count with its provenance."""

    system_key: str
    kind: str
    m: int
    n: int
    epsilon: float
    alpha: float | None
    delta: float | None
    window_key: str
    count: int
    certificate: Certificate
    lower_bound: bool
    regime: CountRegime
    elapsed_ms: float | None = None

    def csv_row(self) -> tuple[str | int | float | bool | None, ...]:
        """Cells in ``COUNT_CSV_HEADER`` order."""
        return (
            self.kind,
            self.m,
            self.n,
            self.epsilon,
            self.alpha,
            self.delta,
            self.count,
            self.certificate.value,
            self.lower_bound,
            self.regime.value,
            self.elapsed_ms,
        )


@dataclass
class SeparatedCounter:
    """Count-only front end used by the rate estimators.

    On the grid full shift with eps < g/2 and a window of depth at most 1, two
    words with different n-prefixes are always separated, and words sharing the
    prefix are separated iff their tails are more than 2 eps apart in the base
    metric. The greedy count then factors as (window prefixes, from the DP
    oracle) times (greedy tail count), which this class uses instead of
    enumerating.

    Attributes:
        sys: System being counted.
        max_candidates: Largest enumerated candidate family.
        dp_cap: Work budget of the DP oracle.
        sample: Replace over-budget enumerations by seeded samples (lower bounds).
        seed: Seed of the sampled modes.
        cache: Optional persistent count cache.
        timings: Record the wall time of each count.
        results: Every count produced, in order.
    """

    sys: SystemSpec
    max_candidates: int = DEFAULT_MAX_CANDIDATES
    dp_cap: int = DEFAULT_DP_CAP
    sample: bool = False
    seed: int = 0
    cache: CountCache | None = None
    timings: bool = False
    results: list[CountResult] = field(default_factory=list, init=False, repr=False)
    _tail_counts: dict[float, tuple[int, bool]] = field(default_factory=dict, init=False, repr=False)

    def tail_count(self, epsilon: float) -> tuple[int, bool]:
        """Greedy count of pad-0 tails of length L at threshold 2 eps.

        Returns:
            The count and whether it came from sampled tails.
        """
        if epsilon in self._tail_counts:
            return self._tail_counts[epsilon]
        depth = truncation_depth(self.sys, epsilon)
        m = self.sys.alphabet_size
        sampled = m**depth > self.max_candidates
        if depth == 0:
            tails = np.zeros((1, 1), dtype=np.int64)
        elif sampled:
            logger.warning("sampling %d of %d^%d tails at eps=%s", self.max_candidates, m, depth, epsilon)
            tails = sample_words(self.sys, 1, epsilon, size=self.max_candidates, seed=self.seed, tail_depth=depth - 1)
        else:
            tails = all_words(m, depth)
        result = (int(greedy_separated_rows(self.sys, tails, 1, 2.0 * epsilon).size), sampled)
        self._tail_counts[epsilon] = result
        return result

    def _factored(self, window: LevelWindow | None, epsilon: float) -> bool:
        return (
            isinstance(self.sys, GridFullShift)
            and self.sys.m >= 2
            and epsilon < self.sys.gap / 2.0
            and (window is None or window.phi.depth == 1)
        )

    def _count_words(self, n: int, epsilon: float, window: LevelWindow | None) -> tuple[int, bool]:
        tail = truncation_depth(self.sys, epsilon, n)
        if window is not None:
            tail = max(tail, window.phi.depth - 1)
        width = n + tail
        required = self.sys.alphabet_size**width
        if required <= self.max_candidates:
            words = all_words(self.sys.alphabet_size, width)
            sampled = False
        elif self.sample:
            logger.warning(
                "sampling %d of %d candidate words at n=%d eps=%s", self.max_candidates, required, n, epsilon
            )
            words = sample_words(self.sys, n, epsilon, size=self.max_candidates, seed=self.seed, tail_depth=tail)
            sampled = True
        else:
            raise BudgetError(
                f"counting at n={n}, eps={epsilon} enumerates {self.sys.alphabet_size}^{width} words",
                required=required,
                cap=self.max_candidates,
                partial=list(self.results),
            )
        if window is not None:
            words = filter_window(window, words)
        return int(greedy_separated_rows(self.sys, words, n, epsilon).size), sampled

    def count(self, *, n: int, epsilon: float, window: LevelWindow | None = None) -> CountResult:
        """Separated count s(f, n, eps), or M(alpha, delta, n, eps) when a window is given.

        Raises:
            BudgetError: If the enumerated regime exceeds ``max_candidates`` and sampling is off.
        """
        _check_scale(epsilon, n)
        if window is not None and window.n != n:
            window = window.with_length(n)
        window_key = window.key if window is not None else ""

        if self.cache is not None:
            cached = self.cache.lookup(system_key=self.sys.key, n=n, epsilon=epsilon, window_key=window_key)
            if cached is not None:
                logger.debug("cache hit %s n=%d eps=%s %s", self.sys.key, n, epsilon, window_key)
                return self._record(
                    n=n,
                    epsilon=epsilon,
                    window=window,
                    count=cached.count,
                    certificate=Certificate(cached.certificate),
                    lower_bound=cached.lower_bound,
                    regime=CountRegime(cached.regime),
                    elapsed_ms=cached.elapsed_ms,
                    store=False,
                )

        start = time.perf_counter()
        if epsilon >= self.sys.diameter and (window is None or window.is_vacuous):
            count, sampled, regime = 1, False, CountRegime.TRIVIAL
        elif self._factored(window, epsilon):
            tails, sampled = self.tail_count(epsilon)
            if window is None:
                prefixes = self.sys.alphabet_size**n
            else:
                prefixes = level_count_dp(
                    m=self.sys.alphabet_size,
                    table=window.phi.table,
                    alpha=window.exact_alpha,
                    delta=window.exact_delta,
                    n=n,
                    cap=self.dp_cap,
                )
            count, regime = prefixes * tails, CountRegime.FACTORED
        else:
            count, sampled = self._count_words(n, epsilon, window)
            regime = CountRegime.SAMPLED if sampled else CountRegime.ENUMERATED
        elapsed = (time.perf_counter() - start) * 1000.0 if self.timings else None
        logger.debug("count %s n=%d eps=%s %s -> %d (%s)", self.sys.key, n, epsilon, window_key, count, regime.value)
        return self._record(
            n=n,
            epsilon=epsilon,
            window=window,
            count=count,
            certificate=Certificate.GREEDY_MAXIMAL,
            lower_bound=sampled,
            regime=regime,
            elapsed_ms=elapsed,
            store=not sampled,
        )

    def _record(
        self,
        *,
        n: int,
        epsilon: float,
        window: LevelWindow | None,
        count: int,
        certificate: Certificate,
        lower_bound: bool,
        regime: CountRegime,
        elapsed_ms: float | None,
        store: bool,
    ) -> CountResult:
        result = CountResult(
            system_key=self.sys.key,
            kind=self.sys.kind.value,
            m=self.sys.alphabet_size,
            n=n,
            epsilon=epsilon,
            alpha=window.alpha if window is not None else None,
            delta=window.delta if window is not None else None,
            window_key=window.key if window is not None else "",
            count=count,
            certificate=certificate,
            lower_bound=lower_bound,
            regime=regime,
            elapsed_ms=elapsed_ms if self.timings else None,
        )
        self.results.append(result)
        if store and self.cache is not None:
            self.cache.store(
                record=CountRecord(
                    system_key=result.system_key,
                    n=n,
                    epsilon=epsilon,
                    window_key=result.window_key,
                    count=count,
                    certificate=certificate.value,
                    lower_bound=lower_bound,
                    regime=regime.value,
                    elapsed_ms=result.elapsed_ms,
                )
            )
        return result


def write_count_rows(path: Path, results: Iterable[CountResult]) -> int:
    """Export counts as CSV with ``COUNT_CSV_HEADER`` columns.

    Returns:
        Number of rows written.
    """
    return write_csv(path, header=COUNT_CSV_HEADER, rows=(r.csv_row() for r in results))


def information_bound(sys: SystemSpec, n: int, epsilon: float) -> float:
    """log(candidate family size)/n, the largest rate any count at (n, eps) can give."""
    return candidate_width(sys, n, epsilon) * math.log(sys.alphabet_size) / n
