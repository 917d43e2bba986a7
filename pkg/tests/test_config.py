"""Tests for the experiment configuration format."""

from fractions import Fraction
from pathlib import Path

import pytest

from mdim_spectra.common.config import ExperimentConfig, load_config, parse_config, serialize_config
from mdim_spectra.common.errors import ConfigError
from mdim_spectra.common.systems import GridFullShift, SystemKind, WeightedShiftCompact

CONFIGS_DIR = Path(__file__).parent.parent / "configs"


class TestParseConfig:
    """Test cases for parsing config text."""

    def test_minimal_config_uses_defaults(self) -> None:
        """Test that only the system kind is required."""
        config = parse_config("kind = grid-full-shift\n")
        assert config.kind is SystemKind.GRID_FULL_SHIFT
        assert config.m == 2
        assert config.n == tuple(range(2, 15))
        assert config.output_dir == Path("reports")

    def test_lists_and_comments(self) -> None:
        """Test comma separated lists and trailing comments."""
        text = (
            "# header\nkind = grid-full-shift  # the system\n"
            "m = 3\nschedule.epsilon = 0.2, 0.1\n\nschedule.n = 2, 4\n"
        )
        config = parse_config(text)
        assert config.m == 3
        assert config.epsilon == (0.2, 0.1)
        assert config.n == (2, 4)

    def test_potential_table_and_matrix(self) -> None:
        """Test exact potential tables and Markov matrices."""
        text = (
            "kind = grid-full-shift\npotential.table = 0, 1/3\n"
            "measure.kind = markov\nmeasure.matrix = 0.9, 0.1; 0.2, 0.8\n"
        )
        config = parse_config(text)
        assert config.potential_table == (Fraction(0), Fraction(1, 3))
        assert config.measure_matrix == ((0.9, 0.1), (0.2, 0.8))
        phi = config.potential(config.system())
        assert phi.table == (Fraction(0), Fraction(1, 3))

    def test_first_coordinate_keyword(self) -> None:
        """Test that the default potential is spelled first_coordinate."""
        config = parse_config("kind = grid-full-shift\npotential.table = first_coordinate\n")
        assert config.potential_table is None
        assert config.potential(GridFullShift(m=2)).table == (Fraction(0), Fraction(1))

    def test_missing_kind(self) -> None:
        """Test that a config without a system kind is rejected."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("m = 2\n")
        assert excinfo.value.key == "kind"

    def test_unknown_key_names_the_line(self) -> None:
        """Test the line number of an unknown key."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("kind = grid-full-shift\ncolour = blue\n")
        assert excinfo.value.line == 2
        assert excinfo.value.key == "colour"
        assert "line 2" in str(excinfo.value)

    def test_repeated_key(self) -> None:
        """Test that a key may appear only once."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("kind = grid-full-shift\nm = 2\nm = 3\n")
        assert excinfo.value.line == 3

    def test_malformed_values(self) -> None:
        """Test values that do not parse."""
        malformed = (
            "kind = torus\n",
            "kind = grid-full-shift\nm = two\n",
            "kind = grid-full-shift\nmeasure.kind = x\n",
        )
        for text in malformed:
            with pytest.raises(ConfigError):
                parse_config(text)

    def test_missing_equals(self) -> None:
        """Test lines without a key/value separator."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("kind grid-full-shift\n")
        assert excinfo.value.line == 1

    def test_unsorted_schedules(self) -> None:
        """Test the ordering rules of the schedules."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("kind = grid-full-shift\nschedule.n = 4, 2\n")
        assert excinfo.value.key == "schedule.n"
        assert excinfo.value.line == 2
        with pytest.raises(ConfigError):
            parse_config("kind = grid-full-shift\nschedule.delta = 0.1, 0.2\n")

    def test_budgets_must_be_positive(self) -> None:
        """Test that caps below one are rejected."""
        with pytest.raises(ConfigError):
            parse_config("kind = grid-full-shift\nbudget.max_candidates = 0\n")

    def test_tolerances_and_bowen_window(self) -> None:
        """Test the Bowen and EDP keys, their defaults and their ranges."""
        config = parse_config("kind = grid-full-shift\nbowen.delta = 0.05\ntolerance.bowen = 0.1\ntolerance.edp = 0.2\n")
        assert (config.bowen_delta, config.tolerance_bowen, config.tolerance_edp) == (0.05, 0.1, 0.2)
        defaults = parse_config("kind = grid-full-shift\n")
        assert (defaults.bowen_delta, defaults.bowen_k_start, defaults.tolerance_bowen) == (0.1, 9, 0.08)
        assert (defaults.moran_n, defaults.max_candidates) == ((8,), 8192)
        with pytest.raises(ConfigError) as excinfo:
            parse_config("kind = grid-full-shift\nbowen.delta = 0\n")
        assert excinfo.value.key == "bowen.delta"
        with pytest.raises(ConfigError):
            parse_config("kind = grid-full-shift\ntolerance.bowen = -0.1\n")

    def test_moran_stage_lengths(self) -> None:
        """Test that every stage list has the same length."""
        with pytest.raises(ConfigError):
            parse_config("kind = grid-full-shift\nmoran.delta = 0.2, 0.1\nmoran.n = 4\n")


class TestExperimentConfig:
    """Test cases for config objects."""

    def test_system_construction(self) -> None:
        """Test both system kinds and invalid parameters."""
        assert parse_config("kind = grid-full-shift\nm = 4\n").system() == GridFullShift(m=4)
        weighted = parse_config("kind = weighted-shift\ngrid_m = 5\n").system()
        assert isinstance(weighted, WeightedShiftCompact)
        assert weighted.grid_m == 5
        with pytest.raises(ConfigError):
            parse_config("kind = grid-full-shift\nm = 0\n").system()

    def test_potential_table_must_fit_the_alphabet(self) -> None:
        """Test that a table of the wrong size is a configuration error."""
        config = parse_config("kind = grid-full-shift\npotential.table = 0, 1, 2\n")
        with pytest.raises(ConfigError):
            config.potential(config.system())

    def test_with_overrides(self) -> None:
        """Test command line overrides."""
        config = ExperimentConfig(kind=SystemKind.GRID_FULL_SHIFT)
        changed = config.with_overrides(seed=7, tolerance=0.1, max_candidates=64, output_dir=Path("out"))
        assert (changed.seed, changed.tolerance_variational, changed.max_candidates) == (7, 0.1, 64)
        assert changed.output_dir == Path("out")
        assert config.with_overrides() == config
        with pytest.raises(ConfigError):
            config.with_overrides(max_candidates=0)

    def test_serialized_form_parses_back(self) -> None:
        """Test that the canonical text form describes the same config."""
        config = parse_config("kind = weighted-shift\npotential.table = -1, 0, 1/2\nschedule.epsilon = 0.3, 0.1\n")
        assert parse_config(serialize_config(config)) == config
        assert serialize_config(config).startswith("kind = weighted-shift\nm = 2\n")


class TestLoadConfig:
    """Test cases for reading config files."""

    def test_shipped_configs_parse(self) -> None:
        """Test every config in the repository."""
        paths = sorted(CONFIGS_DIR.glob("*.conf"))
        assert paths
        for path in paths:
            assert isinstance(load_config(path), ExperimentConfig)

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test that an unreadable file is a configuration error."""
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.conf")
