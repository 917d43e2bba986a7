"""Growth rates of separated counts: h(f, eps), mdim, Lambda_phi and the Bowen exponent.

All logarithms are natural. A rate is estimated from the counts along an
n-schedule: limsup quantities by the largest, liminf quantities by the smallest
value of (1/n) log count over the largest half of the schedule. Every estimate
carries the least-squares slope of log count against n as a cross-check; an
estimate whose cross-check lies further away than its residual is reported as
not converged.
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.optimize import bisect

from mdim_spectra.common.errors import (
    BudgetError,
    ConfigError,
    DomainError,
    EmptyLevelError,
    InconclusiveError,
)
from mdim_spectra.common.potentials import Potential
from mdim_spectra.common.systems import GridFullShift, SystemSpec, all_words, truncation_depth
from mdim_spectra.counting.separated import SeparatedCounter, filter_window, greedy_separated_rows
from mdim_spectra.counting.windows import LevelWindow
from mdim_spectra.oracles.dp import dp_count_table, hull_count_dp

logger = logging.getLogger(__name__)

DEFAULT_DELTA_TOLERANCE = 0.02
MIN_MDIM_SCALES = 3

CounterFactory = Callable[[SystemSpec], SeparatedCounter]


class RateMethod(Enum):
    """Estimators of a limit from finite-n rates."""

    SLOPE_FIT = "slope-fit"
    TAIL_MAX = "tail-max"
    TAIL_MIN = "tail-min"


class DeltaRule(Enum):
    """How the window half-width of a level-set rate was picked."""

    STABILISED = "stabilised"
    SMALLEST = "smallest"


@dataclass(frozen=True)
class RateEstimate:
    """A limit estimated from finite data, never reported without its residual.

    Attributes:
        value: Estimated rate in nats (or ratio, for dimension estimates).
        method: Estimator used.
        n_schedule: Orbit lengths the counts were taken at.
        residual: Largest deviation of the tail data from ``value``.
        lower_flag: Some count was a sampled lower bound.
        upper_flag: The value is an upper bound of the quantity it estimates.
        series: The (x, y) data the estimate was taken from.
        delta: Window half-width the value was taken at, for level-set rates.
        cross_check: The same data under the other estimator (slope fit for the tail estimators).
        delta_rule: How ``delta`` was picked from the delta schedule.
        parts: Per-scale estimates behind a dimension estimate.
    """

    value: float
    method: RateMethod
    n_schedule: tuple[int, ...]
    residual: float
    lower_flag: bool = False
    upper_flag: bool = False
    series: tuple[tuple[float, float], ...] = ()
    delta: float | None = None
    cross_check: float | None = None
    delta_rule: DeltaRule | None = None
    parts: tuple["RateEstimate", ...] = ()

    @property
    def converged(self) -> bool:
        """Whether the cross-check lies within the residual of the value."""
        return self.cross_check is None or abs(self.cross_check - self.value) <= self.residual


def _tail_size(length: int) -> int:
    return math.ceil(length / 2)


def estimate_rate(
    n_schedule: Sequence[int], counts: Sequence[int], *, method: RateMethod = RateMethod.TAIL_MAX
) -> tuple[float, float]:
    """Estimate lim (1/n) log count from counts along ``n_schedule``.

    Zero counts are dropped. The tail estimators take the largest or smallest
    log(c)/n over the largest half of the remaining schedule. The slope fit
    regresses log c on n over the same half (all of it when that half holds a
    single point, and log(c)/n for a single point overall).

    Returns:
        The estimate (clamped at 0) and its residual.

    Raises:
        DomainError: If every count is zero.
    """
    pairs = [(n, c) for n, c in zip(n_schedule, counts, strict=True) if c > 0]
    if not pairs:
        raise DomainError("every count is zero")
    tail = pairs[-_tail_size(len(pairs)) :]
    rates = np.array([math.log(c) / n for n, c in tail])

    if method is RateMethod.TAIL_MAX:
        value = float(rates.max())
    elif method is RateMethod.TAIL_MIN:
        value = float(rates.min())
    else:
        fit = tail if len(tail) >= 2 else pairs
        if len(fit) >= 2:
            xs = np.array([n for n, _ in fit], dtype=np.float64)
            ys = np.array([math.log(c) for _, c in fit])
            value = float(np.polyfit(xs, ys, 1)[0])
        else:
            value = math.log(fit[0][1]) / fit[0][0]
    value = max(value, 0.0)
    return value, float(np.abs(rates - value).max())


def cross_check_method(method: RateMethod) -> RateMethod:
    """Estimator compared against ``method``: the slope fit for tail estimators, tail-max for the slope fit."""
    return RateMethod.TAIL_MAX if method is RateMethod.SLOPE_FIT else RateMethod.SLOPE_FIT


def _estimate(
    schedule: tuple[int, ...], counts: Sequence[int], method: RateMethod, **fields: object
) -> RateEstimate:
    value, residual = estimate_rate(schedule, counts, method=method)
    cross, _ = estimate_rate(schedule, counts, method=cross_check_method(method))
    estimate = RateEstimate(
        value=value,
        method=method,
        n_schedule=schedule,
        residual=residual,
        series=tuple((float(n), math.log(c) / n) for n, c in zip(schedule, counts, strict=True) if c > 0),
        cross_check=cross,
        **fields,  # type: ignore[arg-type]
    )
    if not estimate.converged:
        logger.info(
            "%s estimate %.6f and its cross-check %.6f differ by more than the residual %.3g",
            method.value,
            value,
            cross,
            residual,
        )
    return estimate


def _check_schedule(n_schedule: Sequence[int]) -> tuple[int, ...]:
    schedule = tuple(n_schedule)
    if not schedule:
        raise ConfigError("n schedule is empty", key="schedule.n")
    if schedule[0] < 1 or any(b <= a for a, b in zip(schedule, schedule[1:], strict=False)):
        raise ConfigError(f"n schedule must be positive and strictly increasing, got {schedule}", key="schedule.n")
    return schedule


def _default_counter(sys: SystemSpec) -> SeparatedCounter:
    return SeparatedCounter(sys=sys)


def entropy_at_scale(
    sys: SystemSpec,
    epsilon: float,
    n_schedule: Sequence[int],
    *,
    counter: SeparatedCounter | None = None,
    method: RateMethod = RateMethod.TAIL_MAX,
) -> RateEstimate:
    """h(f, eps) = limsup (1/n) log s(f, n, eps).

    Raises:
        BudgetError: If a count exceeds the counter's budget; the counts
            computed so far are attached to the error.
    """
    schedule = _check_schedule(n_schedule)
    counter = counter or _default_counter(sys)
    results = [counter.count(n=n, epsilon=epsilon) for n in schedule]
    estimate = _estimate(
        schedule, [r.count for r in results], method, lower_flag=any(r.lower_bound for r in results)
    )
    logger.info(
        "h(eps=%s) on %s = %.6f (residual %.3g, cross-check %.6f)",
        epsilon,
        sys.key,
        estimate.value,
        estimate.residual,
        estimate.cross_check,
    )
    return estimate


def coupled_grid_schedule(j_values: Sequence[int], divisor: float = 2.5) -> list[tuple[GridFullShift, float]]:
    """Grid approximations of the shift on [0, 1]^N: m_j = 2^j + 1 letters at eps_j = g_j / divisor."""
    if divisor <= 2:
        raise ConfigError(f"coupled divisor must exceed 2 so that eps_j < g_j/2, got {divisor}")
    family = []
    for j in j_values:
        sys = GridFullShift(m=2**j + 1)
        family.append((sys, sys.gap / divisor))
    return family


def _check_family(family: Sequence[tuple[SystemSpec, float]]) -> None:
    if len(family) < MIN_MDIM_SCALES:
        raise ConfigError(f"dimension estimates need at least {MIN_MDIM_SCALES} scales, got {len(family)}")
    scales = [eps for _, eps in family]
    if any(b >= a for a, b in zip(scales, scales[1:], strict=False)) or scales[-1] <= 0:
        raise ConfigError(f"scales must decrease strictly to 0, got {scales}")
    if any(eps >= 1 for eps in scales):
        raise ConfigError(f"scales must lie below 1 so that |log eps| > 0, got {scales}")


def _ratio_estimate(
    ratios: list[tuple[float, float]], schedule: tuple[int, ...], parts: list[RateEstimate]
) -> RateEstimate:
    tail = [r for _, r in ratios[-_tail_size(len(ratios)) :]]
    value = max(tail)
    return RateEstimate(
        value=value,
        method=RateMethod.TAIL_MAX,
        n_schedule=schedule,
        residual=max(abs(r - value) for r in tail),
        lower_flag=any(part.lower_flag for part in parts),
        series=tuple(ratios),
        parts=tuple(parts),
    )


def mdim_estimate(
    family: Sequence[tuple[SystemSpec, float]],
    n_schedule: Sequence[int],
    *,
    make_counter: CounterFactory = _default_counter,
    method: RateMethod = RateMethod.SLOPE_FIT,
) -> RateEstimate:
    """Upper metric mean dimension as the tail-max of h(f, eps_j)/|log eps_j|.

    Args:
        family: (system, eps_j) pairs with eps_j strictly decreasing.
        n_schedule: Orbit lengths for each entropy estimate.
        make_counter: Builds the counter used at each scale.
        method: Estimator of each h(f, eps_j). The slope fit is unaffected by
            the n-independent tail factor of the counts, which grows with j.

    Raises:
        ConfigError: If the family has fewer than three scales or is unsorted.
    """
    _check_family(family)
    schedule = _check_schedule(n_schedule)
    ratios = []
    parts = []
    for sys, eps in family:
        h = entropy_at_scale(sys, eps, schedule, counter=make_counter(sys), method=method)
        parts.append(h)
        ratios.append((eps, h.value / abs(math.log(eps))))
        logger.info("mdim scale eps=%s on %s: ratio %.6f", eps, sys.key, ratios[-1][1])
    return _ratio_estimate(ratios, schedule, parts)


def _nearest_alpha(sys: SystemSpec, phi: Potential, alpha: float, n: int) -> float | None:
    if phi.depth == 1:
        try:
            table = dp_count_table(m=sys.alphabet_size, table=phi.table, n=n)
        except DomainError:
            return None
        return float(table.nearest_average(alpha))
    return float(min(phi.table, key=lambda v: abs(float(v) - alpha)))


def _check_deltas(delta_schedule: Sequence[float]) -> tuple[float, ...]:
    deltas = tuple(delta_schedule)
    if not deltas:
        raise ConfigError("delta schedule is empty", key="schedule.delta")
    if any(b >= a for a, b in zip(deltas, deltas[1:], strict=False)) or deltas[-1] <= 0:
        raise ConfigError(
            f"delta schedule must be positive and strictly decreasing, got {deltas}", key="schedule.delta"
        )
    return deltas


def lambda_at_scale(
    sys: SystemSpec,
    phi: Potential,
    alpha: float,
    epsilon: float,
    delta_schedule: Sequence[float],
    n_schedule: Sequence[int],
    *,
    counter: SeparatedCounter | None = None,
    method: RateMethod = RateMethod.TAIL_MIN,
    delta_tolerance: float = DEFAULT_DELTA_TOLERANCE,
) -> RateEstimate:
    """Lambda_phi(alpha, eps) = liminf (1/n) log M(alpha, delta, n, eps) as delta shrinks.

    Every delta of the schedule gets an estimate. The value is the one at the
    smallest delta whose estimate moved by less than ``delta_tolerance`` from
    the previous delta (``delta_rule`` STABILISED), or at the smallest delta of
    the schedule when no step stabilises (``delta_rule`` SMALLEST).

    Raises:
        EmptyLevelError: If the window is empty at every n for some delta.
    """
    schedule = _check_schedule(n_schedule)
    deltas = _check_deltas(delta_schedule)
    counter = counter or _default_counter(sys)

    estimates: list[RateEstimate] = []
    stabilised: RateEstimate | None = None
    for delta in deltas:
        results = [counter.count(n=n, epsilon=epsilon, window=LevelWindow(phi, alpha, delta, n)) for n in schedule]
        counts = [r.count for r in results]
        if not any(counts):
            nearest = _nearest_alpha(sys, phi, alpha, schedule[-1])
            raise EmptyLevelError(
                f"level window alpha={alpha}, delta={delta} is empty along {schedule}", nearest_alpha=nearest
            )
        estimate = _estimate(
            schedule, counts, method, lower_flag=any(r.lower_bound for r in results), delta=delta
        )
        logger.debug("Lambda(alpha=%s, eps=%s, delta=%s) = %.6f", alpha, epsilon, delta, estimate.value)
        if estimates and abs(estimate.value - estimates[-1].value) < delta_tolerance:
            stabilised = replace(estimate, delta_rule=DeltaRule.STABILISED)
        estimates.append(estimate)

    if stabilised is not None:
        logger.info("Lambda(alpha=%s, eps=%s) stabilised at delta=%s", alpha, epsilon, stabilised.delta)
        return stabilised
    logger.info("Lambda(alpha=%s, eps=%s) did not stabilise; using delta=%s", alpha, epsilon, deltas[-1])
    return replace(estimates[-1], delta_rule=DeltaRule.SMALLEST)


def lambda_mdim(
    family: Sequence[tuple[SystemSpec, float]],
    alpha: float,
    delta_schedule: Sequence[float],
    n_schedule: Sequence[int],
    *,
    potential_for: Callable[[SystemSpec], Potential] = Potential.first_coordinate,
    make_counter: CounterFactory = _default_counter,
    method: RateMethod = RateMethod.SLOPE_FIT,
) -> RateEstimate:
    """Tail-max of Lambda_phi(alpha, eps_j)/|log eps_j| over a coupled schedule.

    ``method`` estimates each Lambda_phi(alpha, eps_j), as in ``mdim_estimate``.
    """
    _check_family(family)
    schedule = _check_schedule(n_schedule)
    ratios = []
    parts = []
    for sys, eps in family:
        lam = lambda_at_scale(
            sys, potential_for(sys), alpha, eps, delta_schedule, schedule, counter=make_counter(sys), method=method
        )
        parts.append(lam)
        ratios.append((eps, lam.value / abs(math.log(eps))))
    return _ratio_estimate(ratios, schedule, parts)


def hull_counts(
    sys: SystemSpec,
    phi: Potential,
    alpha: float,
    delta: float,
    k_start: int,
    epsilon: float,
    n_values: Sequence[int],
    *,
    counter: SeparatedCounter | None = None,
) -> dict[int, int]:
    """Separated counts of the depth-n cylinder hull of the intersection of P(alpha, delta, n') over n' >= k_start."""
    counter = counter or _default_counter(sys)
    n_max = max(n_values)
    if isinstance(sys, GridFullShift) and sys.m >= 2 and epsilon < sys.gap / 2.0 and phi.depth == 1:
        hull = hull_count_dp(
            m=sys.m, table=phi.table, alpha=alpha, delta=delta, k_start=k_start, n_max=n_max, cap=counter.dp_cap
        )
        tails, _ = counter.tail_count(epsilon)
        return {n: hull[n] * tails for n in n_values}

    counts = {}
    for n in n_values:
        width = n + max(truncation_depth(sys, epsilon, n), phi.depth - 1)
        words = all_words(sys.alphabet_size, width) if sys.alphabet_size**width <= counter.max_candidates else None
        if words is None:
            raise BudgetError(
                f"hull at n={n} enumerates {sys.alphabet_size}^{width} words",
                required=sys.alphabet_size**width,
                cap=counter.max_candidates,
                partial=counts,
            )
        for length in range(k_start, n + 1):
            words = filter_window(LevelWindow(phi, alpha, delta, length), words)
        counts[n] = int(greedy_separated_rows(sys, words, n, epsilon).size)
    return counts


@dataclass(frozen=True)
class BowenRow:
    """Tail trend of (1/n) log(N_n e^{-ns}) at one s."""

    s: float
    trend: float
    diverges: bool


@dataclass(frozen=True)
class BowenExponent:
    """Critical exponent of uniform-length covers with the table it was read from."""

    estimate: RateEstimate
    rows: tuple[BowenRow, ...] = field(default=())


def bowen_level_exponent(
    sys: SystemSpec,
    phi: Potential,
    alpha: float,
    delta: float,
    k_start: int,
    epsilon: float,
    n_schedule: Sequence[int],
    s_grid: Sequence[float],
    *,
    counter: SeparatedCounter | None = None,
) -> BowenExponent:
    """Critical s where sum over uniform covers N(alpha, delta, n, eps) e^{-ns} flips from divergent to vanishing.

    Z is the intersection of P(alpha, delta, n) over n >= k_start, approximated
    at each n by its cylinder hull. The cover sum at s diverges when
    (1/n) log(N_n e^{-ns}) stays positive over the largest half of the
    schedule, so the trend at s is the tail minimum of (1/n) log N_n minus s,
    read on the same liminf scale as ``lambda_at_scale``.

    N_n is the greedy separated count M of the hull. The sandwich
    N(eps) <= M(eps) <= N(eps/2) puts it between the minimal cover counts at eps
    and eps/2, and M(eps) >= N(eps) keeps the exponent an upper bound. Uniform
    length covers form a subfamily of the admissible covers, so the value is an
    upper bound for h(Z, f, eps) as well.

    Raises:
        EmptyLevelError: If the hull is empty at the largest n.
        InconclusiveError: If every grid point diverges, or the trend is not monotone across the grid.
    """
    schedule = _check_schedule(n_schedule)
    grid = tuple(s_grid)
    if not grid or any(b <= a for a, b in zip(grid, grid[1:], strict=False)):
        raise ConfigError(f"s grid must be nonempty and strictly increasing, got {grid}", key="bowen.s_grid")
    n_values = [n for n in schedule if n >= k_start]
    if not n_values:
        raise ConfigError(f"no orbit length in {schedule} reaches k_start={k_start}", key="bowen.k_start")

    counts = hull_counts(sys, phi, alpha, delta, k_start, epsilon, n_values, counter=counter)
    if not counts[n_values[-1]]:
        raise EmptyLevelError(
            f"hull of alpha={alpha}, delta={delta} from k={k_start} is empty at n={n_values[-1]}",
            nearest_alpha=_nearest_alpha(sys, phi, alpha, n_values[-1]),
        )
    fit = [(n, counts[n]) for n in n_values if counts[n] > 0]
    tail = fit[-_tail_size(len(fit)) :]
    floor = min(math.log(c) / n for n, c in tail)

    def trend(s: float) -> float:
        return floor - s

    rows = tuple(BowenRow(s=s, trend=trend(s), diverges=trend(s) > 0) for s in grid)
    table = [(row.s, row.trend, row.diverges) for row in rows]
    flags = [row.diverges for row in rows]
    if any(later and not earlier for earlier, later in zip(flags, flags[1:], strict=False)):
        raise InconclusiveError("cover trend is not monotone across the s grid", table=table)
    if all(flags):
        raise InconclusiveError(f"every s up to {grid[-1]} still diverges", table=table)

    if not flags[0]:
        critical = grid[0]
    else:
        last = max(i for i, d in enumerate(flags) if d)
        lower, upper = grid[last], grid[last + 1]
        critical = float(bisect(trend, lower, upper, xtol=1e-12)) if trend(upper) < 0 else upper

    rates = np.array([math.log(c) / n for n, c in tail])
    slope = (
        float(np.polyfit([n for n, _ in fit], [math.log(c) for _, c in fit], 1)[0]) if len(fit) >= 2 else None
    )
    estimate = RateEstimate(
        value=critical,
        method=RateMethod.TAIL_MIN,
        n_schedule=tuple(n_values),
        residual=float(np.abs(rates - critical).max()),
        upper_flag=True,
        series=tuple((float(n), math.log(c) / n) for n, c in fit),
        delta=delta,
        cross_check=slope,
    )
    logger.info("Bowen exponent alpha=%s delta=%s eps=%s: %.6f", alpha, delta, epsilon, critical)
    return BowenExponent(estimate=estimate, rows=rows)


@dataclass(frozen=True)
class SpectrumRow:
    """One (eps, alpha) cell of a level-set spectrum."""

    epsilon: float
    alpha: float
    lambda_value: float | None
    h_value: float
    ratio: float | None
    delta: float | None
    delta_rule: str | None
    residual: float | None
    cross_check: float | None
    converged: bool | None
    lower_flag: bool
    empty: bool


SPECTRUM_CSV_HEADER = (
    "epsilon",
    "alpha",
    "lambda",
    "h",
    "ratio",
    "delta",
    "delta_rule",
    "residual",
    "cross_check",
    "converged",
    "lower_bound",
    "empty",
)


@dataclass(frozen=True)
class SpectrumTable:
    """Lambda_phi(alpha, eps) and h(f, eps) over an alpha grid and eps schedule."""

    rows: tuple[SpectrumRow, ...]
    delta_schedule: tuple[float, ...]
    n_schedule: tuple[int, ...]

    def csv_rows(self) -> list[tuple[float | bool | str | None, ...]]:
        """Cells in ``SPECTRUM_CSV_HEADER`` order."""
        return [
            (
                r.epsilon,
                r.alpha,
                r.lambda_value,
                r.h_value,
                r.ratio,
                r.delta,
                r.delta_rule,
                r.residual,
                r.cross_check,
                r.converged,
                r.lower_flag,
                r.empty,
            )
            for r in self.rows
        ]


def spectrum_table(
    sys: SystemSpec,
    phi: Potential,
    alphas: Sequence[float],
    epsilons: Sequence[float],
    delta_schedule: Sequence[float],
    n_schedule: Sequence[int],
    *,
    counter: SeparatedCounter | None = None,
    delta_tolerance: float = DEFAULT_DELTA_TOLERANCE,
) -> SpectrumTable:
    """Level-set spectrum cells for every eps (strictly decreasing) and alpha.

    Unreachable alphas give rows flagged ``empty`` instead of failing the table.
    """
    scales = tuple(epsilons)
    if not scales or any(b >= a for a, b in zip(scales, scales[1:], strict=False)):
        raise ConfigError(
            f"eps schedule must be nonempty and strictly decreasing, got {scales}", key="schedule.epsilon"
        )
    counter = counter or _default_counter(sys)
    rows = []
    for eps in scales:
        h = entropy_at_scale(sys, eps, n_schedule, counter=counter)
        scale = abs(math.log(eps)) if eps != 1 else math.nan
        for alpha in alphas:
            try:
                lam = lambda_at_scale(
                    sys, phi, alpha, eps, delta_schedule, n_schedule, counter=counter, delta_tolerance=delta_tolerance
                )
            except EmptyLevelError as err:
                logger.info("alpha=%s unreachable at eps=%s: %s", alpha, eps, err)
                rows.append(
                    SpectrumRow(eps, alpha, None, h.value, None, None, None, None, None, None, h.lower_flag, True)
                )
                continue
            rows.append(
                SpectrumRow(
                    epsilon=eps,
                    alpha=alpha,
                    lambda_value=lam.value,
                    h_value=h.value,
                    ratio=lam.value / scale,
                    delta=lam.delta,
                    delta_rule=lam.delta_rule.value if lam.delta_rule is not None else None,
                    residual=lam.residual,
                    cross_check=lam.cross_check,
                    converged=lam.converged,
                    lower_flag=lam.lower_flag or h.lower_flag,
                    empty=False,
                )
            )
    return SpectrumTable(rows=tuple(rows), delta_schedule=_check_deltas(delta_schedule), n_schedule=tuple(n_schedule))
