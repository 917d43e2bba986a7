"""Report templates: one ``templates/<subcommand>.txt`` per experiment summary.

Templates use ``string.Template`` ``$variable`` placeholders. The variables every
subcommand provides are listed in ``templates/README.md``.
"""

import logging
from collections.abc import Mapping
from pathlib import Path
from string import Template

from mdim_spectra.common.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_TEMPLATES_DIR = Path(__file__).resolve().parents[2] / "templates"
TEMPLATE_SUFFIX = ".txt"


class TemplateManager:
    """Loads report templates once and renders run summaries from them."""

    def __init__(self, *, templates_dir: Path = DEFAULT_TEMPLATES_DIR) -> None:
        """Initialize the manager.

        Args:
            templates_dir: Directory holding ``<report>.txt`` files.
        """
        self.templates_dir = templates_dir
        self._loaded: dict[str, Template] = {}

    def template_path(self, *, report_name: str) -> Path:
        """File holding the template of ``report_name``."""
        return self.templates_dir / f"{report_name}{TEMPLATE_SUFFIX}"

    def load_template(self, *, template_name: str) -> Template:
        """Template of one report, read on first use.

        Raises:
            FileNotFoundError: If the template file does not exist.
        """
        if template_name not in self._loaded:
            path = self.template_path(report_name=template_name)
            if not path.is_file():
                raise FileNotFoundError(f"no report template {path}")
            self._loaded[template_name] = Template(path.read_text(encoding="utf-8"))
            logger.debug("loaded report template %s", path)
        return self._loaded[template_name]

    def missing_variables(self, *, report_name: str, variables: Mapping[str, str]) -> list[str]:
        """Placeholders of the template that ``variables`` leaves unset, sorted."""
        identifiers = self.load_template(template_name=report_name).get_identifiers()
        return sorted(set(identifiers) - set(variables))

    def render_report(self, *, report_name: str, variables: Mapping[str, str]) -> str:
        """Render the text summary of one subcommand.

        Returns:
            Rendered summary ending with a newline.

        Raises:
            ConfigError: If a placeholder of the template has no value.
        """
        missing = self.missing_variables(report_name=report_name, variables=variables)
        if missing:
            raise ConfigError(f"template {report_name!r} needs {', '.join('$' + name for name in missing)}")
        text = self.load_template(template_name=report_name).substitute(variables)
        return text if text.endswith("\n") else text + "\n"

    def available_reports(self) -> list[str]:
        """Report names with a template, sorted; empty when the directory is missing."""
        if not self.templates_dir.is_dir():
            return []
        return sorted(path.stem for path in self.templates_dir.glob(f"*{TEMPLATE_SUFFIX}"))


def get_template_manager() -> TemplateManager:
    """Get the manager reading the project's ``templates/`` directory."""
    return TemplateManager()
