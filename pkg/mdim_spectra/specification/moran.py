"""Orbit gluing on full shifts and the finite stages of a Moran construction.

On a full shift any finite family of orbit segments is shadowed by the
concatenation of the segments, each followed by ``gap`` further symbols of its
own continuation. The points built this way at stage k (T_k) are pairwise
separated, nest inside the closed dynamical balls of their parents and keep
Birkhoff averages near alpha; uniform measures on them give the Entropy
Distribution Principle lower bound.
"""

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from mdim_spectra.common.errors import BudgetError, ContractError, DomainError, EmptyLevelError
from mdim_spectra.common.potentials import Potential, birkhoff_sum
from mdim_spectra.common.systems import (
    Point,
    SystemSpec,
    TailConvention,
    dynamical_distance,
    min_pairwise_distance,
    orbit_distances,
    points_to_words,
)
from mdim_spectra.counting.separated import DEFAULT_MAX_CANDIDATES, M_count, SeparatedSet
from mdim_spectra.counting.windows import LevelWindow
from mdim_spectra.measures.finite import FiniteMeasure, MeasureKind

logger = logging.getLogger(__name__)

DEFAULT_TUPLE_CAP = 4096
DEFAULT_R = 0.9


def gap_for(sys: SystemSpec, epsilon: float) -> int:
    """Least gap m with (diameter of a depth-m cylinder) < epsilon/2.

    Raises:
        DomainError: If ``epsilon`` is not positive.
    """
    if epsilon <= 0:
        raise DomainError(f"scale must be positive, got {epsilon}")
    gap = 0
    while sys.tail_diameter(gap) >= epsilon / 2.0:
        gap += 1
    return gap


@dataclass(frozen=True)
class GluedOrbit:
    """One point shadowing several orbit segments.

    Attributes:
        segments: (point, length) pairs in gluing order.
        gap: Symbols between consecutive segments.
        glued: The shadowing point.
        shadow_epsilon: Scale the shadowing is certified at.
        starts: Index a_j where segment j starts in ``glued``.
        shadow_distances: d_{length_j}(f^{a_j} glued, segment_j) per segment.
    """

    segments: tuple[tuple[Point, int], ...]
    gap: int
    glued: Point
    shadow_epsilon: float
    starts: tuple[int, ...]
    shadow_distances: tuple[float, ...]

    @property
    def total_length(self) -> int:
        """Segment lengths plus the gaps between them."""
        return sum(length for _, length in self.segments) + self.gap * (len(self.segments) - 1)


def glue(sys: SystemSpec, segments: Sequence[tuple[Point, int]], gap: int, epsilon: float) -> GluedOrbit:
    """Concatenate segments, each followed by the next ``gap`` symbols of its own continuation.

    Raises:
        ContractError: If ``gap`` is below gap_for(sys, epsilon) or a shadow
            distance is not below epsilon.
    """
    if not segments:
        raise DomainError("gluing needs at least one segment")
    needed = gap_for(sys, epsilon)
    if gap < needed:
        raise ContractError(f"gap {gap} is below the specification gap {needed} at eps={epsilon}")

    symbols: list[int] = []
    starts = []
    for point, length in segments:
        if length < 1:
            raise DomainError(f"segment length must be positive, got {length}")
        starts.append(len(symbols))
        symbols.extend(point.extended(length + gap))
    glued = Point(word=tuple(symbols), tail=TailConvention.PAD_ZERO)

    distances = []
    for start, (point, length) in zip(starts, segments, strict=True):
        shifted = Point(word=glued.word[start:], tail=glued.tail)
        reference = Point(word=point.extended(max(point.depth, length)), tail=point.tail)
        distances.append(dynamical_distance(sys, shifted, reference, length))
    if any(not d < epsilon for d in distances):
        raise ContractError(f"shadow distances {distances} are not all below {epsilon}")
    return GluedOrbit(
        segments=tuple(segments),
        gap=gap,
        glued=glued,
        shadow_epsilon=epsilon,
        starts=tuple(starts),
        shadow_distances=tuple(distances),
    )


def build_Sk(  # noqa: N802
    sys: SystemSpec,
    phi: Potential,
    alpha: float,
    delta: float,
    n: int,
    epsilon: float,
    *,
    cap: int = DEFAULT_MAX_CANDIDATES,
) -> SeparatedSet:
    """Maximal (n, eps)-separated subset of the window |A_n - alpha| < delta.

    Raises:
        EmptyLevelError: If the window holds no candidate.
    """
    separated = M_count(sys, LevelWindow(phi, alpha, delta, n), epsilon, cap=cap)
    if not separated.count:
        nearest = float(min(phi.table, key=lambda v: abs(float(v) - alpha)))
        raise EmptyLevelError(f"window alpha={alpha}, delta={delta}, n={n} is empty", nearest_alpha=nearest)
    return separated


@dataclass(frozen=True)
class MoranLevel:
    """Stage k of the construction.

    Attributes:
        k: Stage index, from 1.
        S_k: Separated segments of length n_k.
        C_k: Glued tuples of [R_k N_k] segments.
        T_k: Stage points; T_1 = C_1, T_k glues each T_{k-1} point with each C_k point.
        t_k: Orbit length of T_k points.
        c_k: Orbit length of C_k points.
        n_k: Segment length.
        m_k: Gap.
        R_k: Fraction of N_k used.
        N_k: Nominal number of segments.
        blocks: [R_k N_k], segments per C_k point.
        phi: Potential whose averages are controlled.
        alpha: Target average.
        deltas: Window half-widths of stages 1..k.
        epsilon: Base scale.
        parents: For k >= 2, index of each T_k point's parent in T_{k-1}.
        separation_threshold: Required pairwise d_{t_k} separation of T_k.
        min_separation: Achieved pairwise d_{t_k} separation of T_k.
        c_separation: Achieved pairwise d_{c_k} separation of C_k.
        max_nesting: Largest d_{t_{k-1}}(child, parent), None at k = 1.
        gap_symbols: Gap symbols inside the first t_k coordinates, over all stages.
        total_blocks: Segments inside the first t_k coordinates, over all stages.
    """

    k: int
    S_k: SeparatedSet
    C_k: tuple[Point, ...]
    T_k: tuple[Point, ...]
    t_k: int
    c_k: int
    n_k: int
    m_k: int
    R_k: float
    N_k: int
    blocks: int
    phi: Potential
    alpha: float
    deltas: tuple[float, ...]
    epsilon: float
    parents: tuple[int, ...]
    separation_threshold: float
    min_separation: float
    c_separation: float
    max_nesting: float | None
    gap_symbols: int
    total_blocks: int

    @property
    def shadow_epsilon(self) -> float:
        """eps / 2^(k+1), the radius of the closed balls forming F_k."""
        return self.epsilon / 2 ** (self.k + 1)


def build_Ck_Tk(  # noqa: N802
    sys: SystemSpec,
    S_k: SeparatedSet,  # noqa: N803
    R_k: float,  # noqa: N803
    N_k: int,  # noqa: N803
    m_k: int | None = None,
    previous: MoranLevel | None = None,
    *,
    phi: Potential,
    alpha: float,
    delta: float,
    epsilon: float,
    tuple_cap: int = DEFAULT_TUPLE_CAP,
) -> MoranLevel:
    """Glue every [R_k N_k]-tuple of S_k into C_k, then T_{k-1} x C_k into T_k.

    Raises:
        BudgetError: If #S_k^[R_k N_k] or #T_k exceeds ``tuple_cap``.
        ContractError: If a cardinality, separation or nesting invariant fails.
    """
    k = 1 if previous is None else previous.k + 1
    blocks = math.floor(R_k * N_k)
    if blocks < 1:
        raise DomainError(f"[R_k N_k] must be at least 1, got R={R_k}, N={N_k}")
    shadow = epsilon / 2 ** (k + 1)
    gap = gap_for(sys, shadow) if m_k is None else m_k
    n_k = S_k.n

    c_total = S_k.count**blocks
    t_total = c_total * (len(previous.T_k) if previous is not None else 1)
    if max(c_total, t_total) > tuple_cap:
        raise BudgetError(f"stage {k} glues too many tuples", required=max(c_total, t_total), cap=tuple_cap)

    c_points = tuple(
        glue(sys, [(s, n_k) for s in chosen], gap, shadow).glued
        for chosen in itertools.product(S_k.points, repeat=blocks)
    )
    c_k = blocks * n_k + (blocks - 1) * gap

    if previous is None:
        t_points, parents, t_k = c_points, (), c_k
        gap_symbols, total_blocks = (blocks - 1) * gap, blocks
    else:
        glued = [
            (index, glue(sys, [(x, previous.t_k), (y, c_k)], gap, shadow).glued)
            for index, x in enumerate(previous.T_k)
            for y in c_points
        ]
        t_points = tuple(point for _, point in glued)
        parents = tuple(index for index, _ in glued)
        t_k = previous.t_k + gap + c_k
        gap_symbols = previous.gap_symbols + gap + (blocks - 1) * gap
        total_blocks = previous.total_blocks + blocks

    if len(c_points) != S_k.count**blocks or len(t_points) != t_total:
        raise ContractError(f"stage {k} cardinalities {len(c_points)}, {len(t_points)} break the product rule")

    threshold = epsilon if k == 1 else 3.0 * epsilon / 4.0
    c_separation = min_pairwise_distance(sys, points_to_words(list(c_points), c_k + gap), c_k)
    t_separation = min_pairwise_distance(sys, points_to_words(list(t_points), t_k + gap), t_k)
    if c_separation <= epsilon or t_separation <= threshold:
        raise ContractError(
            f"stage {k} separation {c_separation:.6g} (C) / {t_separation:.6g} (T) does not exceed "
            f"{epsilon:.6g} / {threshold:.6g}"
        )

    nesting = None
    if previous is not None:
        nesting = max(
            dynamical_distance(sys, child, previous.T_k[parent], previous.t_k)
            for child, parent in zip(t_points, parents, strict=True)
        )
        if not nesting < epsilon / 2**k:
            raise ContractError(f"stage {k} nesting distance {nesting:.6g} is not below {epsilon / 2**k:.6g}")

    logger.info(
        "stage %d: #C=%d #T=%d t=%d gap=%d min separation %.6g",
        k,
        len(c_points),
        len(t_points),
        t_k,
        gap,
        t_separation,
    )
    return MoranLevel(
        k=k,
        S_k=S_k,
        C_k=c_points,
        T_k=t_points,
        t_k=t_k,
        c_k=c_k,
        n_k=n_k,
        m_k=gap,
        R_k=R_k,
        N_k=N_k,
        blocks=blocks,
        phi=phi,
        alpha=alpha,
        deltas=(previous.deltas if previous is not None else ()) + (delta,),
        epsilon=epsilon,
        parents=parents,
        separation_threshold=threshold,
        min_separation=t_separation,
        c_separation=c_separation,
        max_nesting=nesting,
        gap_symbols=gap_symbols,
        total_blocks=total_blocks,
    )


def build_moran(
    sys: SystemSpec,
    phi: Potential,
    alpha: float,
    *,
    deltas: Sequence[float],
    n_values: Sequence[int],
    R: float = DEFAULT_R,  # noqa: N803
    N: Sequence[int],  # noqa: N803
    epsilon: float,
    m_values: Sequence[int] | None = None,
    cap: int = DEFAULT_MAX_CANDIDATES,
    tuple_cap: int = DEFAULT_TUPLE_CAP,
) -> list[MoranLevel]:
    """Stages 1..K of the construction, one per entry of ``deltas``."""
    if not len(deltas) == len(n_values) == len(N):
        raise DomainError("deltas, n_values and N must have one entry per stage")
    if m_values is not None and len(m_values) != len(deltas):
        raise DomainError("m_values must have one entry per stage")
    levels: list[MoranLevel] = []
    for index, (delta, n, count) in enumerate(zip(deltas, n_values, N, strict=True)):
        separated = build_Sk(sys, phi, alpha, delta, n, epsilon, cap=cap)
        levels.append(
            build_Ck_Tk(
                sys,
                separated,
                R,
                count,
                m_values[index] if m_values is not None else None,
                levels[-1] if levels else None,
                phi=phi,
                alpha=alpha,
                delta=delta,
                epsilon=epsilon,
                tuple_cap=tuple_cap,
            )
        )
    return levels


@dataclass(frozen=True)
class BirkhoffControl:
    """Largest |A_{t_k}(x) - alpha| over T_k against its certified bound."""

    max_deviation: float
    bound: float

    @property
    def holds(self) -> bool:
        """Whether every stage point stays within the bound."""
        return self.max_deviation <= self.bound


def birkhoff_control(sys: SystemSpec, level: MoranLevel) -> BirkhoffControl:
    """Compare max |A_{t_k}(x) - alpha| over T_k with its certified bound.

    The bound is max delta_i + Var(phi, eps/2^k) + (gap symbols + (r - 1) blocks) / t_k * sup|phi - alpha|.
    """
    alpha = Fraction(repr(level.alpha))
    spread = float(max(abs(level.phi.max_value - alpha), abs(level.phi.min_value - alpha)))
    uncontrolled = level.gap_symbols + (level.phi.depth - 1) * level.total_blocks
    bound = (
        max(level.deltas)
        + level.phi.variation(sys, level.epsilon / 2**level.k)
        + uncontrolled / level.t_k * spread
    )
    depth = level.t_k + level.phi.depth - 1
    deviation = max(
        abs(float(birkhoff_sum(sys, level.phi, Point(word=x.extended(depth)), level.t_k) / level.t_k - alpha))
        for x in level.T_k
    )
    return BirkhoffControl(max_deviation=deviation, bound=bound)


def moran_set_contains(sys: SystemSpec, level: MoranLevel, x: Point) -> bool:
    """Whether x lies in F_k, the union of closed (t_k, eps/2^(k+1))-balls around T_k."""
    width = max(level.t_k + level.m_k, x.depth)
    words = points_to_words(list(level.T_k), width)
    target = points_to_words([x], width)[0]
    return bool(np.any(orbit_distances(sys, words, target, level.t_k) <= level.shadow_epsilon))


def eta_measure(points: Sequence[Point], alphabet_size: int) -> FiniteMeasure:
    """Uniform atoms on the stage points.

    Raises:
        DomainError: If ``points`` is empty.
    """
    if not points:
        raise DomainError("eta needs at least one stage point")
    return FiniteMeasure.empirical(points, alphabet_size, name="eta")


@dataclass(frozen=True)
class BallSample:
    """Mass of one sampled (n, eps)-ball."""

    centre: int
    mass: float
    rate: float


@dataclass(frozen=True)
class EdpBound:
    """Entropy Distribution Principle lower bound.

    Attributes:
        value: min over sampled balls of -(1/n) log eta(ball).
        degenerate: A ball carried the full mass, so the bound is 0.
        samples: Every ball with positive mass.
    """

    value: float
    degenerate: bool
    samples: tuple[BallSample, ...]


def edp_lower_bound(
    sys: SystemSpec, eta: FiniteMeasure, sample: Sequence[Point], n: int, epsilon: float
) -> EdpBound:
    """Largest s with eta(B_n(x, eps)) <= e^{-ns} at every sampled ball charging eta.

    Raises:
        DomainError: If eta is not atomic or no sampled ball has positive mass.
    """
    if eta.kind is not MeasureKind.EMPIRICAL or eta.weights is None:
        raise DomainError("the ball bound needs an atomic measure")
    if n < 1 or epsilon <= 0:
        raise DomainError(f"need n >= 1 and eps > 0, got n={n}, eps={epsilon}")
    width = max(n, max(p.depth for p in eta.atoms), max((p.depth for p in sample), default=n))
    atoms = points_to_words(list(eta.atoms), width)
    centres = points_to_words(list(sample), width)

    samples = []
    for index in range(centres.shape[0]):
        mass = float(eta.weights[orbit_distances(sys, atoms, centres[index], n) < epsilon].sum())
        if mass > 0:
            samples.append(BallSample(centre=index, mass=mass, rate=-math.log(min(mass, 1.0)) / n))
    if not samples:
        raise DomainError("no sampled ball carries eta mass")
    if any(s.mass >= 1.0 - 1e-12 for s in samples):
        return EdpBound(value=0.0, degenerate=True, samples=tuple(samples))
    return EdpBound(value=min(s.rate for s in samples), degenerate=False, samples=tuple(samples))
