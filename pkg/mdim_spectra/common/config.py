"""Experiment configuration: a flat ``key = value`` text format with dotted section keys.

Example::

    # full shift over {0, 1}
    kind = grid-full-shift
    m = 2
    schedule.epsilon = 0.2, 0.1
    schedule.n = 2, 4, 6, 8, 10, 12
    budget.max_candidates = 8192

Lists are comma separated; matrix rows are separated by ``;``. Unknown keys,
malformed values and unsorted schedules raise ``ConfigError`` naming the line.
"""

import dataclasses
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from mdim_spectra.common.errors import ConfigError, MdimSpectraError
from mdim_spectra.common.potentials import Potential
from mdim_spectra.common.systems import GridFullShift, NuForm, SystemKind, SystemSpec, WeightedShiftCompact

logger = logging.getLogger(__name__)

MEASURE_KINDS = ("gibbs", "bernoulli", "markov")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs besides the subcommand.

    Attributes:
        kind: System kind.
        m: Alphabet size of the grid full shift.
        nu_form: Weight form of the weighted shift.
        nu_param: Ratio (geometric) or exponent (polynomial) of the weights.
        p: Exponent of the weighted l^p norm.
        ell_trunc: Coordinates kept by the weighted shift.
        grid_m: Coordinate grid size of the weighted shift.
        potential_depth: Depth r of the potential table.
        potential_table: Exact values of the m^r words, None for the first coordinate.
        potential_name: Label used in reports.
        epsilon: Scales, strictly decreasing.
        delta: Window half-widths, strictly decreasing.
        n: Orbit lengths, strictly increasing.
        alpha: Level grid, strictly increasing.
        coupled_j: Exponents j of the coupled schedule m_j = 2^j + 1.
        coupled_divisor: eps_j = g_j / divisor.
        bowen_k_start: Shortest length in the hull counts.
        bowen_delta: Window half-width of the hull counts and of the Lambda they are compared with.
        bowen_s_grid: Exponents tried by the critical-exponent search.
        moran_alpha: Target average of the construction.
        moran_delta: Window half-width per stage.
        moran_n: Segment length per stage.
        moran_R: Fraction of N_k used per stage.
        moran_N: Nominal segment count per stage.
        moran_epsilon: Base scale of the construction.
        measure_kind: Measure family fed to the measure-theoretic side.
        measure_p: Letter probabilities of a Bernoulli measure.
        measure_matrix: Transition matrix of a Markov measure.
        max_candidates: Largest enumerated candidate family.
        dp_cap: Largest DP table.
        tuple_cap: Largest glued tuple family.
        seed: Seed of the sampled counting mode.
        tolerance_variational: Pass/fail tolerance (nats) of Lambda against h_phi and H*.
        tolerance_bowen: Pass/fail tolerance (nats) of the Bowen exponent against Lambda.
        tolerance_edp: Margin (nats) the stage EDP bound may fall below Lambda.
        tolerance_delta: Stabilisation tolerance of the delta schedule.
        output_dir: Directory receiving the reports.
    """

    kind: SystemKind
    m: int = 2
    nu_form: NuForm = NuForm.GEOMETRIC
    nu_param: float = 0.5
    p: float = 1.0
    ell_trunc: int = 8
    grid_m: int = 3
    potential_depth: int = 1
    potential_table: tuple[Fraction, ...] | None = None
    potential_name: str = "first_coordinate"
    epsilon: tuple[float, ...] = (0.2,)
    delta: tuple[float, ...] = (0.2, 0.1, 0.05)
    n: tuple[int, ...] = tuple(range(2, 15))
    alpha: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    coupled_j: tuple[int, ...] = (2, 3, 4, 5, 6)
    coupled_divisor: float = 2.5
    bowen_k_start: int = 9
    bowen_delta: float = 0.1
    bowen_s_grid: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    moran_alpha: float = 0.5
    moran_delta: tuple[float, ...] = (0.2,)
    moran_n: tuple[int, ...] = (8,)
    moran_R: float = 1.0  # noqa: N815
    moran_N: tuple[int, ...] = (1,)  # noqa: N815
    moran_epsilon: float = 0.49
    measure_kind: str = "gibbs"
    measure_p: tuple[float, ...] = ()
    measure_matrix: tuple[tuple[float, ...], ...] = ()
    max_candidates: int = 8192
    dp_cap: int = 50_000_000
    tuple_cap: int = 4096
    seed: int = 0
    tolerance_variational: float = 0.07
    tolerance_bowen: float = 0.08
    tolerance_edp: float = 0.15
    tolerance_delta: float = 0.02
    output_dir: Path = field(default=Path("reports"))

    def system(self) -> SystemSpec:
        """Build the configured system.

        Raises:
            ConfigError: If the system parameters are out of range.
        """
        try:
            if self.kind is SystemKind.GRID_FULL_SHIFT:
                return GridFullShift(m=self.m)
            return WeightedShiftCompact(
                nu_form=self.nu_form,
                nu_param=self.nu_param,
                p=self.p,
                ell_trunc=self.ell_trunc,
                grid_m=self.grid_m,
            )
        except MdimSpectraError as e:
            raise ConfigError(f"invalid system: {e}", key="kind") from e

    def potential(self, sys: SystemSpec) -> Potential:
        """Build the configured potential for ``sys``."""
        if self.potential_table is None:
            return Potential.first_coordinate(sys)
        try:
            return Potential(
                depth=self.potential_depth,
                alphabet_size=sys.alphabet_size,
                table=self.potential_table,
                name=self.potential_name,
            )
        except MdimSpectraError as e:
            raise ConfigError(f"invalid potential: {e}", key="potential.table") from e

    def with_overrides(
        self,
        *,
        seed: int | None = None,
        tolerance: float | None = None,
        max_candidates: int | None = None,
        output_dir: Path | None = None,
    ) -> "ExperimentConfig":
        """Apply command line overrides."""
        changes: dict[str, Any] = {}
        if seed is not None:
            changes["seed"] = seed
        if tolerance is not None:
            changes["tolerance_variational"] = tolerance
        if max_candidates is not None:
            if max_candidates < 1:
                raise ConfigError("--max-candidates must be positive", key="budget.max_candidates")
            changes["max_candidates"] = max_candidates
        if output_dir is not None:
            changes["output_dir"] = output_dir
        return dataclasses.replace(self, **changes)


def _split(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _render_float(value: float) -> str:
    return repr(float(value))


def _render_list(values: tuple[Any, ...], render: Callable[[Any], str]) -> str:
    return ", ".join(render(v) for v in values)


def _parse_matrix(text: str) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(float(v) for v in _split(row)) for row in text.split(";") if row.strip())


def _render_matrix(rows: tuple[tuple[float, ...], ...]) -> str:
    return "; ".join(_render_list(row, _render_float) for row in rows)


def _parse_table(text: str) -> tuple[Fraction, ...] | None:
    if text.strip().lower() == "first_coordinate":
        return None
    return tuple(Fraction(v) for v in _split(text))


def _render_table(table: tuple[Fraction, ...] | None) -> str:
    return "first_coordinate" if table is None else _render_list(table, str)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in _split(text))


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in _split(text))


def _parse_measure_kind(text: str) -> str:
    if text not in MEASURE_KINDS:
        raise ValueError(f"expected one of {', '.join(MEASURE_KINDS)}")
    return text


# config key -> (attribute, parser, renderer)
_KEYS: dict[str, tuple[str, Callable[[str], Any], Callable[[Any], str]]] = {
    "kind": ("kind", SystemKind, lambda v: v.value),
    "m": ("m", int, str),
    "nu_form": ("nu_form", NuForm, lambda v: v.value),
    "nu_param": ("nu_param", float, _render_float),
    "p": ("p", float, _render_float),
    "ell_trunc": ("ell_trunc", int, str),
    "grid_m": ("grid_m", int, str),
    "potential.depth": ("potential_depth", int, str),
    "potential.table": ("potential_table", _parse_table, _render_table),
    "potential.name": ("potential_name", str, str),
    "schedule.epsilon": ("epsilon", _parse_floats, lambda v: _render_list(v, _render_float)),
    "schedule.delta": ("delta", _parse_floats, lambda v: _render_list(v, _render_float)),
    "schedule.n": ("n", _parse_ints, lambda v: _render_list(v, str)),
    "schedule.alpha": ("alpha", _parse_floats, lambda v: _render_list(v, _render_float)),
    "schedule.coupled_j": ("coupled_j", _parse_ints, lambda v: _render_list(v, str)),
    "schedule.coupled_divisor": ("coupled_divisor", float, _render_float),
    "bowen.k_start": ("bowen_k_start", int, str),
    "bowen.delta": ("bowen_delta", float, _render_float),
    "bowen.s_grid": ("bowen_s_grid", _parse_floats, lambda v: _render_list(v, _render_float)),
    "moran.alpha": ("moran_alpha", float, _render_float),
    "moran.delta": ("moran_delta", _parse_floats, lambda v: _render_list(v, _render_float)),
    "moran.n": ("moran_n", _parse_ints, lambda v: _render_list(v, str)),
    "moran.R": ("moran_R", float, _render_float),
    "moran.N": ("moran_N", _parse_ints, lambda v: _render_list(v, str)),
    "moran.epsilon": ("moran_epsilon", float, _render_float),
    "measure.kind": ("measure_kind", _parse_measure_kind, str),
    "measure.p": ("measure_p", _parse_floats, lambda v: _render_list(v, _render_float)),
    "measure.matrix": ("measure_matrix", _parse_matrix, _render_matrix),
    "budget.max_candidates": ("max_candidates", int, str),
    "budget.dp_cap": ("dp_cap", int, str),
    "budget.tuple_cap": ("tuple_cap", int, str),
    "seed": ("seed", int, str),
    "tolerance.variational": ("tolerance_variational", float, _render_float),
    "tolerance.bowen": ("tolerance_bowen", float, _render_float),
    "tolerance.edp": ("tolerance_edp", float, _render_float),
    "tolerance.delta": ("tolerance_delta", float, _render_float),
    "output.dir": ("output_dir", Path, str),
}

_INCREASING = ("n", "alpha", "coupled_j", "bowen_s_grid")
_DECREASING = ("epsilon", "delta")
_NONEMPTY = ("epsilon", "delta", "n", "alpha", "coupled_j", "bowen_s_grid", "moran_delta", "moran_n", "moran_N")
_POSITIVE = ("max_candidates", "dp_cap", "tuple_cap")
_NONNEGATIVE = ("tolerance_variational", "tolerance_bowen", "tolerance_edp", "tolerance_delta")


def _validate(values: dict[str, Any], lines: dict[str, int]) -> None:
    def fail(attribute: str, message: str) -> None:
        key = next(k for k, spec in _KEYS.items() if spec[0] == attribute)
        raise ConfigError(f"{key}: {message}", line=lines.get(attribute), key=key)

    for attribute in _NONEMPTY:
        if attribute in values and not values[attribute]:
            fail(attribute, "must not be empty")
    for attribute in _INCREASING:
        series = values.get(attribute, ())
        if any(b <= a for a, b in zip(series, series[1:], strict=False)):
            fail(attribute, "must be strictly increasing")
    for attribute in _DECREASING:
        series = values.get(attribute, ())
        if any(b >= a for a, b in zip(series, series[1:], strict=False)):
            fail(attribute, "must be strictly decreasing")
    for attribute in _POSITIVE:
        if attribute in values and values[attribute] < 1:
            fail(attribute, "must be positive")
    for attribute in _NONNEGATIVE:
        if attribute in values and values[attribute] < 0:
            fail(attribute, "must not be negative")
    if "bowen_delta" in values and values["bowen_delta"] <= 0:
        fail("bowen_delta", "must be positive")
    stages = {len(values.get(a, getattr(ExperimentConfig, a))) for a in ("moran_delta", "moran_n", "moran_N")}
    if len(stages) > 1:
        fail("moran_delta", "moran.delta, moran.n and moran.N need one entry per stage")


def parse_config(text: str) -> ExperimentConfig:
    """Parse the text form of a configuration.

    Args:
        text: Config file contents.

    Returns:
        The parsed configuration.

    Raises:
        ConfigError: On unknown or repeated keys, malformed values, unsorted
            schedules or a missing ``kind``.
    """
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=number)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", line=number, key=key)
        attribute, parse, _ = _KEYS[key]
        if attribute in values:
            raise ConfigError(f"key {key!r} is repeated", line=number, key=key)
        try:
            values[attribute] = parse(value)
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"malformed value for {key!r}: {value!r} ({e})", line=number, key=key) from e
        lines[attribute] = number

    if "kind" not in values:
        raise ConfigError("missing required key 'kind'", key="kind")
    _validate(values, lines)
    logger.debug("parsed config keys: %s", ", ".join(sorted(values)))
    return ExperimentConfig(**values)


def serialize_config(config: ExperimentConfig) -> str:
    """Render the canonical text form, one key per line in a fixed order."""
    return "".join(f"{key} = {render(getattr(config, attribute))}\n" for key, (attribute, _, render) in _KEYS.items())


def load_config(path: Path) -> ExperimentConfig:
    """Read and parse a config file.

    Raises:
        ConfigError: If the file cannot be read or does not parse.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text)
