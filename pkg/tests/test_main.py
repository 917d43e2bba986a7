"""Tests for the command line entry point and its exit codes."""

from pathlib import Path

import pytest

from main import EXIT_BUDGET, EXIT_CONFIG, EXIT_OK, EXIT_TOLERANCE, build_parser, main
from mdim_spectra.utils.locking import LOCK_NAME

ENTROPY_CONFIG = "kind = grid-full-shift\nschedule.n = 2, 3\nschedule.epsilon = 0.2\n"


def _write_config(tmp_path: Path, text: str) -> str:
    path = tmp_path / "run.conf"
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestParser:
    """Test cases for the argument parser."""

    def test_subcommands(self) -> None:
        """Test that every experiment takes the shared options."""
        args = build_parser().parse_args(["mdim", "--config", "x.conf", "--seed", "4", "-vv"])
        assert args.subcommand == "mdim"
        assert args.seed == 4
        assert args.verbose == 2
        assert args.cache is None

    def test_cache_flag_without_path(self) -> None:
        """Test that a bare --cache selects the default cache."""
        args = build_parser().parse_args(["oracle", "--config", "x.conf", "--cache"])
        assert args.cache == "default"

    def test_config_is_required(self) -> None:
        """Test that experiments refuse to run without a config."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["hphi"])


class TestMain:
    """Test cases for exit codes of full runs."""

    def test_successful_run(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test a small entropy run writing its reports."""
        config = _write_config(tmp_path, ENTROPY_CONFIG)
        out = tmp_path / "reports"
        assert main(["entropy-scale", "--config", config, "--out", str(out)]) == EXIT_OK
        assert (out / "entropy-scale.csv").exists()
        assert (out / "entropy-scale.txt").exists()
        assert not (out / LOCK_NAME).exists()
        printed = capsys.readouterr().out
        assert "h = 1.059351 (slope 0.693147, not converged)" in printed

    def test_level_spectrum_off_gibbs_entropy(self, tmp_path: Path) -> None:
        """Test the tolerance exit code of a spectrum read through a vacuous window."""
        text = "kind = grid-full-shift\nschedule.alpha = 0.5\nschedule.delta = 0.6\nschedule.n = 2, 3, 4, 5, 6\n"
        config = _write_config(tmp_path, text)
        argv = ["level-spectrum", "--config", config, "--out", str(tmp_path / "out")]
        assert main(argv) == EXIT_TOLERANCE
        assert (tmp_path / "out" / "level-spectrum.csv").exists()

    def test_missing_config_file(self, tmp_path: Path) -> None:
        """Test that an unreadable config is a configuration error."""
        assert main(["entropy-scale", "--config", str(tmp_path / "absent.conf")]) == EXIT_CONFIG

    def test_config_without_kind(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that a config missing the system kind is rejected."""
        config = _write_config(tmp_path, "m = 3\n")
        assert main(["entropy-scale", "--config", config, "--out", str(tmp_path)]) == EXIT_CONFIG
        assert "kind" in capsys.readouterr().err

    def test_locked_output_directory(self, tmp_path: Path) -> None:
        """Test that a held lock refuses the run and is left in place."""
        config = _write_config(tmp_path, ENTROPY_CONFIG)
        out = tmp_path / "reports"
        out.mkdir()
        (out / LOCK_NAME).write_text("999\n", encoding="utf-8")
        assert main(["entropy-scale", "--config", config, "--out", str(out)]) == EXIT_CONFIG
        assert (out / LOCK_NAME).exists()
        assert not (out / "entropy-scale.csv").exists()

    def test_budget_exceeded(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the budget exit code and the suggested cap."""
        config = _write_config(tmp_path, "kind = grid-full-shift\nschedule.n = 4, 5\nschedule.epsilon = 0.6\n")
        argv = ["entropy-scale", "--config", config, "--out", str(tmp_path / "out"), "--max-candidates", "16"]
        assert main(argv) == EXIT_BUDGET
        assert "--max-candidates 512" in capsys.readouterr().err
        assert not (tmp_path / "out" / LOCK_NAME).exists()

    def test_cache_stats(self, tmp_path: Path) -> None:
        """Test the cache subcommand on a fresh database."""
        assert main(["cache", "stats", "--cache", str(tmp_path / "counts.db")]) == EXIT_OK

    def test_cached_run(self, tmp_path: Path) -> None:
        """Test that a second run reads the counts stored by the first."""
        config = _write_config(tmp_path, ENTROPY_CONFIG)
        db = str(tmp_path / "counts.db")
        argv = ["entropy-scale", "--config", config, "--out", str(tmp_path / "out"), "--cache", db]
        assert main(argv) == EXIT_OK
        assert main(argv) == EXIT_OK
        assert (tmp_path / "counts.db").exists()
