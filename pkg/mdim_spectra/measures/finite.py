"""Finite measures on symbolic systems, cylinder partitions and their entropies."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray
from scipy.special import entr

from mdim_spectra.common.errors import BudgetError, ContractError, DepthError, DomainError, EmptyLevelError
from mdim_spectra.common.potentials import Potential
from mdim_spectra.common.systems import (
    Point,
    SystemSpec,
    all_words,
    orbit_distances,
    points_to_words,
    truncation_depth,
)
from mdim_spectra.counting.separated import SeparatedSet
from mdim_spectra.oracles.gibbs import constrained_max_entropy
from mdim_spectra.spectra.rates import RateEstimate, RateMethod

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-12
STATIONARITY_TOLERANCE = 1e-10
INTEGRAL_TOLERANCE = 1e-9
DEFAULT_CELL_CAP = 1 << 22
DEFAULT_ATOM_CAP = 4096


class MeasureKind(Enum):
    """Supported finite measures."""

    EMPIRICAL = "empirical"
    BERNOULLI = "bernoulli"
    MARKOV = "markov"


@dataclass(frozen=True, eq=False)
class FiniteMeasure:
    """Bernoulli, Markov or finitely-supported empirical measure.

    Attributes:
        kind: Measure family.
        alphabet_size: Alphabet size m.
        p: Letter probabilities (Bernoulli) or stationary vector (Markov).
        matrix: Transition matrix (Markov only).
        atoms: Support points (empirical only).
        weights: Atom weights (empirical only).
        alpha_tolerance: Declared |integral - alpha| slack of an empirical member.
        name: Label used in reports.
    """

    kind: MeasureKind
    alphabet_size: int
    p: NDArray[np.float64] | None = None
    matrix: NDArray[np.float64] | None = None
    atoms: tuple[Point, ...] = ()
    weights: NDArray[np.float64] | None = None
    alpha_tolerance: float | None = None
    name: str = "mu"

    @classmethod
    def bernoulli(cls, p: Sequence[float], *, name: str = "bernoulli") -> "FiniteMeasure":
        """Product measure with letter probabilities ``p``."""
        vector = _probability_vector(p)
        return cls(kind=MeasureKind.BERNOULLI, alphabet_size=vector.size, p=vector, name=name)

    @classmethod
    def markov(
        cls, matrix: Sequence[Sequence[float]], *, stationary: Sequence[float] | None = None, name: str = "markov"
    ) -> "FiniteMeasure":
        """Stationary Markov measure; the stationary vector comes from the eigenvector of P^T for eigenvalue 1."""
        transition = np.array(matrix, dtype=np.float64)
        if transition.ndim != 2 or transition.shape[0] != transition.shape[1]:
            raise DomainError(f"transition matrix must be square, got shape {transition.shape}")
        if np.any(transition < 0) or np.any(np.abs(transition.sum(axis=1) - 1.0) > NORMALIZATION_TOLERANCE):
            raise DomainError("transition matrix rows must be probability vectors")
        if stationary is None:
            evals, evecs = np.linalg.eig(transition.T)
            vector = np.real(evecs[:, int(np.argmin(np.abs(evals - 1.0)))])
            vector = np.abs(vector / vector.sum())
        else:
            vector = _probability_vector(stationary)
        if np.abs(vector @ transition - vector).max() > STATIONARITY_TOLERANCE:
            raise DomainError("vector is not stationary for the transition matrix")
        return cls(kind=MeasureKind.MARKOV, alphabet_size=vector.size, p=vector, matrix=transition, name=name)

    @classmethod
    def empirical(
        cls,
        atoms: Sequence[Point],
        alphabet_size: int,
        *,
        weights: Sequence[float] | None = None,
        alpha_tolerance: float | None = None,
        name: str = "empirical",
    ) -> "FiniteMeasure":
        """Atomic measure on ``atoms`` (uniform unless ``weights`` is given)."""
        if not atoms:
            raise DomainError("an empirical measure needs at least one atom")
        if weights is None:
            mass = np.full(len(atoms), 1.0 / len(atoms))
        else:
            if len(weights) != len(atoms):
                raise DomainError(f"{len(atoms)} atoms but {len(weights)} weights")
            mass = _probability_vector(weights)
        return cls(
            kind=MeasureKind.EMPIRICAL,
            alphabet_size=alphabet_size,
            atoms=tuple(atoms),
            weights=mass,
            alpha_tolerance=alpha_tolerance,
            name=name,
        )

    @property
    def invariant(self) -> bool:
        """Whether the measure is shift-invariant by construction."""
        return self.kind is not MeasureKind.EMPIRICAL


def _probability_vector(values: Sequence[float]) -> NDArray[np.float64]:
    vector = np.array(values, dtype=np.float64)
    if vector.ndim != 1 or vector.size == 0:
        raise DomainError("a probability vector must be a nonempty list")
    if np.any(vector < 0):
        raise DomainError(f"probabilities must be nonnegative, got {vector.tolist()}")
    if abs(float(vector.sum()) - 1.0) > NORMALIZATION_TOLERANCE:
        raise DomainError(f"probabilities must sum to 1, got {float(vector.sum())!r}")
    return vector


def cylinder_masses(mu: FiniteMeasure, depth: int) -> NDArray[np.float64]:
    """Mass of every depth-r cylinder, in lexicographic word order."""
    if depth < 1:
        raise DomainError(f"cylinder depth must be positive, got {depth}")
    m = mu.alphabet_size
    if mu.kind is MeasureKind.EMPIRICAL:
        assert mu.weights is not None
        words = points_to_words(list(mu.atoms), depth)
        index = np.zeros(words.shape[0], dtype=np.int64)
        for column in range(depth):
            index = index * m + words[:, column]
        masses = np.zeros(m**depth, dtype=np.float64)
        np.add.at(masses, index, mu.weights)
        return masses

    assert mu.p is not None
    if mu.kind is MeasureKind.BERNOULLI:
        masses = mu.p.copy()
        for _ in range(depth - 1):
            masses = np.outer(masses, mu.p).ravel()
        return masses

    assert mu.matrix is not None
    masses = mu.p.copy()
    for _ in range(depth - 1):
        masses = (masses.reshape(-1, m)[:, :, np.newaxis] * mu.matrix[np.newaxis, :, :]).reshape(-1)
    return masses


def integrate(mu: FiniteMeasure, phi: Potential) -> float:
    """Integral of a locally constant potential."""
    if phi.alphabet_size != mu.alphabet_size:
        raise DomainError(f"potential has {phi.alphabet_size} letters, measure has {mu.alphabet_size}")
    return float(cylinder_masses(mu, phi.depth) @ phi.float_table)


@dataclass(frozen=True)
class Partition:
    """The m^r cylinder sets of depth r.

    Attributes:
        depth: Number of coordinates fixed by a cell.
        alphabet_size: Alphabet size m.
        diameter_bound: Certified upper bound on every cell's diameter.
    """

    depth: int
    alphabet_size: int
    diameter_bound: float

    @property
    def cell_count(self) -> int:
        """Number of cells."""
        return self.alphabet_size**self.depth


def cylinder_partition(sys: SystemSpec, epsilon: float) -> Partition:
    """Coarsest cylinder partition whose cell diameters are certified below epsilon.

    Raises:
        DomainError: If ``epsilon`` is not positive.
    """
    if epsilon <= 0:
        raise DomainError(f"scale must be positive, got {epsilon}")
    depth = 1
    while sys.tail_diameter(depth) >= epsilon:
        depth += 1
    return Partition(depth=depth, alphabet_size=sys.alphabet_size, diameter_bound=sys.tail_diameter(depth))


def refine(xi: Partition, n: int) -> Partition:
    """The join of f^{-j} xi over j < n, which for depth-r cylinders is the depth-(r+n-1) partition."""
    if n < 1:
        raise DomainError(f"refinement length must be positive, got {n}")
    return Partition(depth=xi.depth + n - 1, alphabet_size=xi.alphabet_size, diameter_bound=xi.diameter_bound)


def partition_entropy(mu: FiniteMeasure, xi: Partition, *, cap: int = DEFAULT_CELL_CAP) -> float:
    """H_mu(xi) = -sum mu(C) log mu(C), with 0 log 0 = 0.

    Raises:
        BudgetError: If the partition has more than ``cap`` cells.
    """
    if xi.alphabet_size != mu.alphabet_size:
        raise DomainError(f"partition has {xi.alphabet_size} letters, measure has {mu.alphabet_size}")
    if xi.cell_count > cap:
        raise BudgetError(f"partition of depth {xi.depth} has too many cells", required=xi.cell_count, cap=cap)
    return float(entr(cylinder_masses(mu, xi.depth)).sum())


def entropy_rate(mu: FiniteMeasure, xi: Partition, n_max: int, *, cap: int = DEFAULT_CELL_CAP) -> RateEstimate:
    """h_mu(f, xi) = lim (1/n) H_mu(xi^n).

    For invariant measures the value is the slope of H_mu(xi^n) in n, exact for
    Bernoulli and Markov measures on cylinder partitions; the residual is the
    largest deviation of the increments H(xi^n) - H(xi^{n-1}) over the largest
    half of 1..n_max. Empirical measures report (1/n_max) H(xi^n_max) with the
    upper flag, since they are not invariant.
    """
    if n_max < 1:
        raise DomainError(f"n_max must be positive, got {n_max}")
    schedule = tuple(range(1, n_max + 1))
    entropies = np.array([partition_entropy(mu, refine(xi, n), cap=cap) for n in schedule])

    if not mu.invariant:
        value = float(entropies[-1] / n_max)
        previous = float(entropies[-2] / (n_max - 1)) if n_max > 1 else value
        return RateEstimate(
            value=value,
            method=RateMethod.TAIL_MAX,
            n_schedule=schedule,
            residual=abs(value - previous),
            upper_flag=True,
            series=tuple((float(n), float(h / n)) for n, h in zip(schedule, entropies, strict=True)),
        )

    if n_max == 1:
        value, residual = float(entropies[0]), 0.0
    else:
        value = max(float(np.polyfit(np.array(schedule, dtype=np.float64), entropies, 1)[0]), 0.0)
        increments = np.diff(entropies)
        tail = increments[-math.ceil(increments.size / 2) :]
        residual = float(np.abs(tail - value).max())
    return RateEstimate(
        value=value,
        method=RateMethod.SLOPE_FIT,
        n_schedule=schedule,
        residual=residual,
        series=tuple((float(n), float(h / n)) for n, h in zip(schedule, entropies, strict=True)),
    )


def gibbs_measure_for_level(sys: SystemSpec, phi: Potential, alpha: float) -> FiniteMeasure:
    """Bernoulli measure of maximal entropy among those with integral alpha.

    Raises:
        DomainError: If ``phi`` is not of depth 1.
        EmptyLevelError: If alpha lies outside [min phi, max phi].
    """
    if phi.depth != 1:
        raise DomainError(f"Gibbs level measures need a depth-1 potential, got depth {phi.depth}")
    if phi.alphabet_size != sys.alphabet_size:
        raise DomainError(f"potential has {phi.alphabet_size} letters, system has {sys.alphabet_size}")
    low, high = float(phi.min_value), float(phi.max_value)
    if not low <= alpha <= high:
        raise EmptyLevelError(f"no measure integrates {phi.name} to {alpha}", nearest_alpha=min(max(alpha, low), high))
    solution = constrained_max_entropy(phi.table, alpha)
    p = solution.p / solution.p.sum()
    return FiniteMeasure.bernoulli(p.tolist(), name=f"gibbs(alpha={alpha})")


def empirical_from_separated(
    separated: SeparatedSet, n: int, *, alphabet_size: int, alpha_tolerance: float | None = None
) -> tuple[FiniteMeasure, FiniteMeasure]:
    """sigma uniform on the set and mu = (1/n) sum_{i<n} (f^i)_* sigma.

    Raises:
        DomainError: If the set is empty.
        DepthError: If a member stores fewer than n coordinates.
    """
    if not separated.points:
        raise DomainError("empirical measures need a nonempty separated set")
    if min(p.depth for p in separated.points) < n:
        raise DepthError(f"pushing forward {n} times needs members of depth at least {n}")
    sigma = FiniteMeasure.empirical(separated.points, alphabet_size, alpha_tolerance=alpha_tolerance, name="sigma")
    pushed = [Point(word=p.word[i:], tail=p.tail) for i in range(n) for p in separated.points]
    mu = FiniteMeasure.empirical(pushed, alphabet_size, alpha_tolerance=alpha_tolerance, name="orbit-average")
    return sigma, mu


def h_phi_at_scale(
    sys: SystemSpec,
    phi: Potential,
    alpha: float,
    epsilon: float,
    family: Sequence[FiniteMeasure],
    *,
    n_max: int = 8,
) -> RateEstimate:
    """max over the family of inf over |xi| < eps of h_mu(f, xi), on cylinder partitions.

    Invariant members must integrate phi to alpha within 1e-9; empirical members
    within their declared ``alpha_tolerance``.

    Raises:
        DomainError: If the family is empty.
        ContractError: If a member misses alpha.
    """
    if not family:
        raise DomainError("h_phi needs at least one measure")
    xi = cylinder_partition(sys, epsilon)
    best: RateEstimate | None = None
    for mu in family:
        slack = INTEGRAL_TOLERANCE if mu.invariant else mu.alpha_tolerance
        if slack is None:
            raise ContractError(f"empirical member '{mu.name}' carries no alpha tolerance")
        integral = integrate(mu, phi)
        if abs(integral - alpha) > slack:
            raise ContractError(f"member '{mu.name}' integrates {phi.name} to {integral}, not {alpha} (slack {slack})")
        rate = entropy_rate(mu, xi, n_max)
        logger.debug("h_mu(xi depth %d) for %s = %.6f", xi.depth, mu.name, rate.value)
        if best is None or rate.value > best.value:
            best = rate
    assert best is not None
    return best


def _weighted_atoms(mu: FiniteMeasure, width: int, cap: int) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
    if mu.kind is MeasureKind.EMPIRICAL:
        assert mu.weights is not None
        return points_to_words(list(mu.atoms), width), mu.weights
    required = mu.alphabet_size**width
    if required > cap:
        raise BudgetError(f"atoms of a {mu.kind.value} measure at width {width}", required=required, cap=cap)
    masses = cylinder_masses(mu, width)
    carried = masses > 0
    return all_words(mu.alphabet_size, width)[carried], masses[carried]


def katok_count(
    sys: SystemSpec,
    mu: FiniteMeasure,
    n: int,
    epsilon: float,
    delta: float,
    *,
    cap: int = DEFAULT_ATOM_CAP,
) -> int:
    """Greedy N_mu(delta, eps, n): open (n, eps)-balls centred on atoms covering mass >= 1 - delta.

    Bernoulli and Markov measures are represented by their depth n + L cylinder
    masses on pad-0 words. The greedy choice gives an upper bound.
    """
    if not 0 <= delta < 1:
        raise DomainError(f"delta must lie in [0, 1), got {delta}")
    width = n + truncation_depth(sys, epsilon, n)
    if mu.kind is MeasureKind.EMPIRICAL:
        width = max(width, max(p.depth for p in mu.atoms))
    words, weights = _weighted_atoms(mu, width, cap)
    inside = np.array([orbit_distances(sys, words, words[i], n) < epsilon for i in range(words.shape[0])])
    uncovered = np.ones(words.shape[0], dtype=np.bool_)
    covered_mass, balls = 0.0, 0
    target = 1.0 - delta - NORMALIZATION_TOLERANCE
    while covered_mass < target:
        gains = (inside & uncovered[np.newaxis, :]) @ weights
        best = int(np.argmax(gains))
        uncovered &= ~inside[best]
        covered_mass += float(gains[best])
        balls += 1
    return balls


def separated_partition_entropy(sys: SystemSpec, separated: SeparatedSet) -> float:
    """H_sigma(xi^n) for sigma uniform on the set and xi the cylinder partition below its scale.

    Equals log(count) when no cell of xi^n holds two members.
    """
    sigma = FiniteMeasure.empirical(separated.points, sys.alphabet_size, name="sigma")
    xi = refine(cylinder_partition(sys, separated.epsilon), separated.n)
    return partition_entropy(sigma, xi)
