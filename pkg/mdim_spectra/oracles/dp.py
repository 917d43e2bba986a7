"""Exact level-set word counts by dynamic programming over letter sums.

Letter values are quantized to integers over their common denominator, so every
window comparison is exact rational arithmetic and the counts are Python
integers (no overflow for large n).
"""

import logging
import math
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from mdim_spectra.common.errors import BudgetError, DomainError
from mdim_spectra.common.potentials import exact

logger = logging.getLogger(__name__)

DEFAULT_DP_CAP = 50_000_000


@dataclass(frozen=True)
class DPCountTable:
    """Histogram of Birkhoff sums over all words of length n.

    Attributes:
        n: Word length.
        alphabet_size: Number of letters m.
        histogram: Exact Birkhoff sum mapped to the number of words attaining it.
    """

    n: int
    alphabet_size: int
    histogram: dict[Fraction, int]

    @property
    def total(self) -> int:
        """Number of words counted, always m^n."""
        return sum(self.histogram.values())

    def count_within(self, *, alpha: float | Fraction, delta: float | Fraction) -> int:
        """Words whose average lies strictly within ``delta`` of ``alpha``."""
        a, d = exact(alpha), exact(delta)
        return sum(count for total, count in self.histogram.items() if abs(total / self.n - a) < d)

    def nearest_average(self, alpha: float | Fraction) -> Fraction:
        """Achievable average closest to ``alpha`` (ties go to the smaller one)."""
        a = exact(alpha)
        return min((total / self.n for total in self.histogram), key=lambda avg: (abs(avg - a), avg))


def _quantize(m: int, table: Sequence[float | int | str | Fraction]) -> tuple[Counter[int], int]:
    if len(table) != m:
        raise DomainError(f"depth-1 table needs {m} values, got {len(table)}")
    values = [exact(v) for v in table]
    scale = math.lcm(*(v.denominator for v in values))
    return Counter(int(v * scale) for v in values), scale


def _step(states: Counter[int], letters: Counter[int]) -> Counter[int]:
    nxt: Counter[int] = Counter()
    for total, count in states.items():
        for value, multiplicity in letters.items():
            nxt[total + value] += count * multiplicity
    return nxt


def _check_budget(*, work: int, cap: int, n: int) -> None:
    if work > cap:
        raise BudgetError(f"DP over {n} steps exceeds its work budget", required=work, cap=cap)


def dp_count_table(
    *, m: int, table: Sequence[float | int | str | Fraction], n: int, cap: int = DEFAULT_DP_CAP
) -> DPCountTable:
    """Histogram of exact Birkhoff sums of a depth-1 potential over all length-n words.

    Args:
        m: Alphabet size.
        table: Letter values of the potential.
        n: Word length, at least 1.
        cap: Work budget (state updates).

    Raises:
        BudgetError: If the convolution would exceed ``cap`` updates.
    """
    if n < 1:
        raise DomainError(f"word length must be positive, got {n}")
    letters, scale = _quantize(m, table)
    states: Counter[int] = Counter({0: 1})
    work = 0
    for _ in range(n):
        work += len(states) * len(letters)
        _check_budget(work=work, cap=cap, n=n)
        states = _step(states, letters)
    histogram = {Fraction(total, scale): count for total, count in sorted(states.items())}
    return DPCountTable(n=n, alphabet_size=m, histogram=histogram)


def level_count_dp(
    *,
    m: int,
    table: Sequence[float | int | str | Fraction],
    alpha: float | Fraction,
    delta: float | Fraction,
    n: int,
    cap: int = DEFAULT_DP_CAP,
) -> int:
    """Exact number of length-n words w with |<phi(w)> - alpha| < delta."""
    return dp_count_table(m=m, table=table, n=n, cap=cap).count_within(alpha=alpha, delta=delta)


def hull_count_dp(
    *,
    m: int,
    table: Sequence[float | int | str | Fraction],
    alpha: float | Fraction,
    delta: float | Fraction,
    k_start: int,
    n_max: int,
    cap: int = DEFAULT_DP_CAP,
) -> dict[int, int]:
    """Words of length n whose averages stay in the window at every length k_start..n.

    This is the depth-n cylinder hull of the intersection of P(alpha, delta, n')
    over n' >= k_start.

    Returns:
        Mapping from n (k_start..n_max) to the exact hull count.
    """
    if not 1 <= k_start <= n_max:
        raise DomainError(f"need 1 <= k_start <= n_max, got k_start={k_start}, n_max={n_max}")
    letters, scale = _quantize(m, table)
    a, d = exact(alpha), exact(delta)
    states: Counter[int] = Counter({0: 1})
    counts: dict[int, int] = {}
    work = 0
    for length in range(1, n_max + 1):
        work += len(states) * len(letters)
        _check_budget(work=work, cap=cap, n=n_max)
        states = _step(states, letters)
        if length >= k_start:
            states = Counter(
                {total: c for total, c in states.items() if abs(Fraction(total, scale * length) - a) < d}
            )
            counts[length] = sum(states.values())
    logger.debug("hull counts for alpha=%s delta=%s from k=%d: %s", alpha, delta, k_start, counts)
    return counts
