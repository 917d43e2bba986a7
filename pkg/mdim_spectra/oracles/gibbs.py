"""Constrained maximum entropy over letter distributions and the DP-vs-Gibbs check.

The maximiser of H(p) subject to sum p_i a_i = alpha is the exponential family
p_i proportional to exp(beta a_i); its mean is strictly increasing in beta, so
the multiplier is found by bisection on a geometrically grown bracket.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import bisect
from scipy.special import entr, softmax

from mdim_spectra.common.errors import DomainError
from mdim_spectra.oracles.dp import DEFAULT_DP_CAP, dp_count_table

logger = logging.getLogger(__name__)

MEAN_TOLERANCE = 1e-10
_BOUNDARY_TOLERANCE = 1e-12
_MAX_BRACKET_DOUBLINGS = 200


@dataclass(frozen=True)
class GibbsSolution:
    """Maximum entropy distribution with a prescribed mean.

    Attributes:
        p: Probability of each letter.
        entropy: H(p) in nats.
        beta: Exponential-family multiplier (infinite at a boundary mean).
    """

    p: NDArray[np.float64]
    entropy: float
    beta: float

    def mean(self, values: Sequence[float]) -> float:
        """Mean of ``values`` under ``p``."""
        return float(self.p @ np.asarray(values, dtype=np.float64))


def _degenerate(mask: NDArray[np.bool_], beta: float) -> GibbsSolution:
    p = mask.astype(np.float64) / mask.sum()
    return GibbsSolution(p=p, entropy=math.log(int(mask.sum())), beta=beta)


def constrained_max_entropy(values: Sequence[float | Fraction], alpha: float) -> GibbsSolution:
    """Maximise H(p) subject to sum p_i a_i = alpha.

    At a boundary alpha the solution is uniform on the letters attaining the
    extreme value, with entropy log of their multiplicity.

    Args:
        values: Letter values a_1..a_m.
        alpha: Prescribed mean.

    Returns:
        The Gibbs solution.

    Raises:
        DomainError: If ``alpha`` lies outside [min a, max a].
    """
    a = np.array([float(v) for v in values], dtype=np.float64)
    low, high = float(a.min()), float(a.max())
    if alpha < low - _BOUNDARY_TOLERANCE or alpha > high + _BOUNDARY_TOLERANCE:
        raise DomainError(f"mean {alpha} is outside the letter range [{low}, {high}]")

    if high - low <= _BOUNDARY_TOLERANCE:
        return _degenerate(np.ones_like(a, dtype=np.bool_), 0.0)
    if abs(alpha - low) <= _BOUNDARY_TOLERANCE:
        return _degenerate(np.isclose(a, low, rtol=0.0, atol=_BOUNDARY_TOLERANCE), -math.inf)
    if abs(alpha - high) <= _BOUNDARY_TOLERANCE:
        return _degenerate(np.isclose(a, high, rtol=0.0, atol=_BOUNDARY_TOLERANCE), math.inf)

    def excess(beta: float) -> float:
        return float(softmax(beta * a) @ a) - alpha

    lower, upper = -1.0, 1.0
    for _ in range(_MAX_BRACKET_DOUBLINGS):
        if excess(lower) <= 0:
            break
        lower *= 2.0
    for _ in range(_MAX_BRACKET_DOUBLINGS):
        if excess(upper) >= 0:
            break
        upper *= 2.0

    beta = float(bisect(excess, lower, upper, xtol=1e-15, maxiter=4000))
    p = softmax(beta * a)
    residual = abs(float(p @ a) - alpha)
    if residual > MEAN_TOLERANCE:
        logger.warning("Gibbs mean residual %.3g exceeds %.1g at alpha=%s", residual, MEAN_TOLERANCE, alpha)
    return GibbsSolution(p=p, entropy=float(entr(p).sum()), beta=beta)


@dataclass(frozen=True)
class DpGibbsRow:
    """One length of the DP-vs-Gibbs comparison."""

    n: int
    count: int
    rate: float | None
    gap: float | None


@dataclass(frozen=True)
class DpGibbsReport:
    """Exact window growth rates against the constrained entropy maximum."""

    m: int
    alpha: float
    delta: float
    gibbs_entropy: float
    rows: tuple[DpGibbsRow, ...]

    @property
    def gap_shrinks(self) -> bool:
        """Whether the last measured gap is no larger than the first."""
        gaps = [row.gap for row in self.rows if row.gap is not None]
        return len(gaps) < 2 or gaps[-1] <= gaps[0]


def dp_rate_vs_gibbs(
    *,
    m: int,
    table: Sequence[float | int | str | Fraction],
    alpha: float,
    delta: float,
    n_schedule: Sequence[int],
    cap: int = DEFAULT_DP_CAP,
) -> DpGibbsReport:
    """Compare (1/n) log of the exact window count with H*(alpha) along ``n_schedule``."""
    gibbs = constrained_max_entropy([float(Fraction(v) if isinstance(v, str) else v) for v in table], alpha)
    rows = []
    for n in n_schedule:
        count = dp_count_table(m=m, table=table, n=n, cap=cap).count_within(alpha=alpha, delta=delta)
        rate = math.log(count) / n if count > 0 else None
        gap = gibbs.entropy - rate if rate is not None else None
        rows.append(DpGibbsRow(n=n, count=count, rate=rate, gap=gap))
    return DpGibbsReport(m=m, alpha=alpha, delta=delta, gibbs_entropy=gibbs.entropy, rows=tuple(rows))
