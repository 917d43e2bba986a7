"""Tests for report writers, templates and the output lock."""

import json
import math
from pathlib import Path

import pytest

from mdim_spectra.common.errors import ConfigError
from mdim_spectra.templates.manager import TemplateManager, get_template_manager
from mdim_spectra.utils.locking import LOCK_NAME, OutputLock
from mdim_spectra.utils.reports import format_number, write_csv, write_jsonl


class TestReportWriters:
    """Test cases for CSV and JSON-lines output."""

    def test_format_number(self) -> None:
        """Test the cell rendering rules."""
        assert format_number(None) == ""
        assert format_number(True) == "true"
        assert format_number(math.inf) == "inf"
        assert format_number(-math.inf) == "-inf"
        assert format_number(1 / 3) == "0.3333333333"
        assert format_number(42) == "42"

    def test_write_csv(self, tmp_path: Path) -> None:
        """Test header and rows of a CSV report."""
        path = tmp_path / "out" / "table.csv"
        assert write_csv(path, header=("a", "b"), rows=[(1, 0.5), (None, False)]) == 2
        assert path.read_text(encoding="utf-8") == "a,b\n1,0.5\n,false\n"

    def test_write_jsonl(self, tmp_path: Path) -> None:
        """Test sorted keys and non-finite floats."""
        path = tmp_path / "summary.jsonl"
        assert write_jsonl(path, [{"b": 1, "a": math.inf}, {"x": math.nan}]) == 2
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == '{"a": "inf", "b": 1}'
        assert json.loads(lines[1]) == {"x": None}


class TestTemplateManager:
    """Test cases for report templates."""

    def test_every_subcommand_has_a_template(self) -> None:
        """Test the shipped templates."""
        names = get_template_manager().available_reports()
        for name in ("entropy-scale", "mdim", "level-spectrum", "hphi", "variational-check", "spec-demo", "oracle"):
            assert name in names

    def test_render_report(self, tmp_path: Path) -> None:
        """Test substitution and the trailing newline."""
        (tmp_path / "demo.txt").write_text("System: $system", encoding="utf-8")
        manager = TemplateManager(templates_dir=tmp_path)
        assert manager.render_report(report_name="demo", variables={"system": "m=2"}) == "System: m=2\n"

    def test_missing_template(self, tmp_path: Path) -> None:
        """Test that an unknown template raises."""
        with pytest.raises(FileNotFoundError):
            TemplateManager(templates_dir=tmp_path).load_template(template_name="absent")

    def test_unset_placeholder(self, tmp_path: Path) -> None:
        """Test that a placeholder without a value names the variable."""
        (tmp_path / "demo.txt").write_text("$system at $seed", encoding="utf-8")
        manager = TemplateManager(templates_dir=tmp_path)
        assert manager.missing_variables(report_name="demo", variables={"system": "m=2"}) == ["seed"]
        with pytest.raises(ConfigError, match=r"\$seed"):
            manager.render_report(report_name="demo", variables={"system": "m=2"})

    def test_missing_directory(self, tmp_path: Path) -> None:
        """Test that a missing directory lists nothing."""
        assert TemplateManager(templates_dir=tmp_path / "none").available_reports() == []


class TestOutputLock:
    """Test cases for the output directory lock."""

    def test_lock_lifecycle(self, tmp_path: Path) -> None:
        """Test acquisition, exclusion and release."""
        with OutputLock(out_dir=tmp_path / "reports") as lock:
            assert lock.held
            assert (tmp_path / "reports" / LOCK_NAME).exists()
            with pytest.raises(ConfigError):
                OutputLock(out_dir=tmp_path / "reports").acquire()
        assert not (tmp_path / "reports" / LOCK_NAME).exists()

    def test_release_without_acquire(self, tmp_path: Path) -> None:
        """Test that a lock not held leaves foreign lock files alone."""
        (tmp_path / LOCK_NAME).write_text("1234\n", encoding="utf-8")
        OutputLock(out_dir=tmp_path).release()
        assert (tmp_path / LOCK_NAME).exists()
