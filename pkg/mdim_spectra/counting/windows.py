"""Finite-time Birkhoff level windows P(alpha, delta, n)."""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from numpy.typing import NDArray

from mdim_spectra.common.errors import DomainError
from mdim_spectra.common.potentials import Potential, birkhoff_sum, exact
from mdim_spectra.common.systems import Point, SystemSpec


@dataclass(frozen=True)
class LevelWindow:
    """Query for the points whose length-n Birkhoff average lies within delta of alpha."""

    phi: Potential
    alpha: float
    delta: float
    n: int

    def __post_init__(self) -> None:
        """Validate the window parameters."""
        if self.delta <= 0:
            raise DomainError(f"window half-width must be positive, got {self.delta}")
        if self.n < 1:
            raise DomainError(f"window length must be positive, got {self.n}")

    @cached_property
    def exact_alpha(self) -> Fraction:
        """Target average as a fraction."""
        return exact(self.alpha)

    @cached_property
    def exact_delta(self) -> Fraction:
        """Half-width as a fraction."""
        return exact(self.delta)

    @property
    def is_vacuous(self) -> bool:
        """Whether every average the potential can produce lies inside the window."""
        return (
            abs(self.phi.max_value - self.exact_alpha) < self.exact_delta
            and abs(self.phi.min_value - self.exact_alpha) < self.exact_delta
        )

    @property
    def key(self) -> str:
        """Identifier of the window without its length, used by caches."""
        return f"{self.phi.key}|alpha={self.alpha!r}|delta={self.delta!r}"

    def with_length(self, n: int) -> "LevelWindow":
        """Same potential and target at another orbit length."""
        return LevelWindow(phi=self.phi, alpha=self.alpha, delta=self.delta, n=n)

    def contains_sum(self, total: Fraction) -> bool:
        """Whether an exact Birkhoff sum of length n lies in the window."""
        return abs(total / self.n - self.exact_alpha) < self.exact_delta

    def contains_scaled(self, scaled_sums: NDArray[np.int64]) -> NDArray[np.bool_]:
        """Vectorised membership for sums scaled by ``phi.denominator``."""
        scale = self.phi.denominator
        distinct, inverse = np.unique(scaled_sums, return_inverse=True)
        inside = np.array([self.contains_sum(Fraction(int(s), scale)) for s in distinct], dtype=np.bool_)
        return inside[inverse.reshape(-1)] if distinct.size else np.zeros(0, dtype=np.bool_)


def level_membership(sys: SystemSpec, window: LevelWindow, x: Point) -> bool:
    """Whether |A_n(x) - alpha| < delta, evaluated exactly.

    Raises:
        DepthError: If ``x`` is too short for the window.
    """
    return window.contains_sum(birkhoff_sum(sys, window.phi, x, window.n))
