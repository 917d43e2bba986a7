"""Explicit separated grid and interval cover for the weighted backward shift.

For K = {|x_k| <= 1} in l^p(nu):

- points whose first n coordinates lie on the grid {0, s, 2s, ...} with
  spacing s = eps / nu_1^(1/p) (and 0 afterwards) are (n, eps)-separated,
  giving floor(nu_1^(1/p)/eps) + 1 values per coordinate;
- products of the intervals ((k-1)u, (k+1)u), u = eps/(12M), over the first
  n + ell coordinates cover K, with at most 2 floor(12M/eps) choices each.

Both counts are certified at tiny sizes by direct evaluation.
"""

import math
from dataclasses import dataclass

import numpy as np

from mdim_spectra.common.errors import BudgetError, DomainError
from mdim_spectra.common.systems import WeightedShiftCompact, value_orbit_distances
from mdim_spectra.counting.separated import Certificate

_FLOOR_SLACK = 1e-9
_MAX_ELL = 100_000
DEFAULT_GRID_CAP = 4096


@dataclass(frozen=True)
class WeightedShiftBounds:
    """Logarithms of the separated-grid and cover cardinalities at one (eps, n)."""

    epsilon: float
    n: int
    ell: int
    grid_size: int
    cover_size: int
    log_lower: float
    log_upper: float

    @property
    def lower_ratio(self) -> float:
        """log_lower / (n |log eps|)."""
        return self.log_lower / (self.n * abs(math.log(self.epsilon)))

    @property
    def upper_ratio(self) -> float:
        """log_upper / (n |log eps|)."""
        return self.log_upper / (self.n * abs(math.log(self.epsilon)))


@dataclass(frozen=True)
class GridCertificate:
    """Direct evaluation of the separated grid's pairwise d_n."""

    grid_size: int
    points: int
    min_distance: float
    strict: bool
    non_strict: bool

    @property
    def certificate(self) -> Certificate:
        """Certificate of the grid read as a separated set."""
        return Certificate.EXPLICIT_GRID


@dataclass(frozen=True)
class CoverCertificate:
    """Sampled check that cover elements have d_n-diameter below eps."""

    samples: int
    max_distance: float
    covered: bool
    valid: bool


def _check_scale(epsilon: float, n: int) -> None:
    if epsilon <= 0:
        raise DomainError(f"scale must be positive, got {epsilon}")
    if n < 1:
        raise DomainError(f"orbit length must be positive, got {n}")


def required_ell(sys: WeightedShiftCompact, epsilon: float) -> int:
    """Smallest ell with sum_{k > ell} nu_k < (eps/2)^p."""
    threshold = (epsilon / 2.0) ** sys.p
    for ell in range(_MAX_ELL):
        if sys.nu_tail(ell) < threshold:
            return ell
    raise DomainError(f"no ell below {_MAX_ELL} meets the weight tail condition at eps={epsilon}")


def grid_size(sys: WeightedShiftCompact, epsilon: float) -> int:
    """Number of separated grid values per coordinate."""
    return math.floor(sys.nu(1) ** (1.0 / sys.p) / epsilon + _FLOOR_SLACK) + 1


def weighted_shift_bounds(
    sys: WeightedShiftCompact, epsilon: float, n: int, ell: int | None = None
) -> WeightedShiftBounds:
    """Lower and upper log-counts from the separated grid and the interval cover.

    Args:
        sys: Weighted shift whose weights and exponent are used.
        epsilon: Scale.
        n: Orbit length.
        ell: Cover depth past n; defaults to the smallest admissible value.

    Raises:
        DomainError: If ``ell`` violates the weight tail condition.
    """
    _check_scale(epsilon, n)
    needed = required_ell(sys, epsilon)
    if ell is None:
        ell = needed
    elif sys.nu_tail(ell) >= (epsilon / 2.0) ** sys.p:
        raise DomainError(f"weight tail after ell={ell} is too heavy at eps={epsilon}; need ell >= {needed}")

    grid = grid_size(sys, epsilon)
    cover = max(1, 2 * math.floor(12.0 * sys.norm_bound / epsilon + _FLOOR_SLACK))
    return WeightedShiftBounds(
        epsilon=epsilon,
        n=n,
        ell=ell,
        grid_size=grid,
        cover_size=cover,
        log_lower=n * math.log(grid),
        log_upper=(n + ell + 1) * math.log(cover),
    )


def certify_weighted_shift_grid(
    sys: WeightedShiftCompact, epsilon: float, n: int, *, cap: int = DEFAULT_GRID_CAP
) -> GridCertificate:
    """Evaluate pairwise d_n over the whole separated grid.

    Adjacent grid points sit exactly eps apart for p = 1, so the strict and the
    non-strict separation outcomes are both reported.

    Raises:
        BudgetError: If the grid has more than ``cap`` points.
    """
    _check_scale(epsilon, n)
    size = grid_size(sys, epsilon)
    total = size**n
    if total > cap:
        raise BudgetError("separated grid too large to certify", required=total, cap=cap)

    spacing = epsilon / sys.nu(1) ** (1.0 / sys.p)
    width = n - 1 + sys.ell_trunc
    axes = np.meshgrid(*[np.arange(size) * spacing] * n, indexing="ij")
    coords = np.stack([axis.ravel() for axis in axes], axis=1)
    points = np.zeros((total, width), dtype=np.float64)
    points[:, :n] = coords

    best = math.inf
    for i in range(total - 1):
        best = min(best, float(value_orbit_distances(sys, points[i + 1 :], points[i], n).min()))
    tolerance = 1e-12 * max(1.0, epsilon)
    return GridCertificate(
        grid_size=size,
        points=total,
        min_distance=best,
        strict=best > epsilon,
        non_strict=best >= epsilon - tolerance,
    )


def certify_weighted_shift_cover(
    sys: WeightedShiftCompact,
    epsilon: float,
    n: int,
    ell: int | None = None,
    *,
    samples: int = 200,
    seed: int = 0,
) -> CoverCertificate:
    """Sample pairs sharing a cover element and measure their d_n.

    Coordinates past n + ell are unconstrained by the cover and drawn freely.
    """
    bounds = weighted_shift_bounds(sys, epsilon, n, ell)
    rng = np.random.default_rng(seed)
    unit = epsilon / (12.0 * sys.norm_bound)
    k_max = math.floor(12.0 * sys.norm_bound / epsilon + _FLOOR_SLACK)
    width = n - 1 + sys.ell_trunc
    fixed = min(width, n + bounds.ell)

    x = rng.uniform(-1.0, 1.0, size=(samples, width))
    k = np.clip(np.rint(x[:, :fixed] / unit), -k_max, k_max)
    covered = bool(np.all(np.abs(x[:, :fixed] - k * unit) < unit))

    y = rng.uniform(-1.0, 1.0, size=(samples, width))
    y[:, :fixed] = np.clip(k * unit + rng.uniform(-unit, unit, size=(samples, fixed)), -1.0, 1.0)

    largest = 0.0
    for i in range(samples):
        largest = max(largest, float(value_orbit_distances(sys, y[i : i + 1], x[i], n)[0]))
    return CoverCertificate(samples=samples, max_distance=largest, covered=covered, valid=largest < epsilon)
