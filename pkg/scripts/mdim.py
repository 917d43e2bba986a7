"""Upper metric mean dimension along the coupled grid schedule."""

from pathlib import Path

from mdim_spectra.services.experiment_service import ExperimentService
from scripts.report_output import publish_report


def main(*, service: ExperimentService, out_dir: Path, copy: bool = False) -> int:
    """Run the coupled schedule and write its reports.

    Returns:
        Exit status, always 0.
    """
    print(f"🔄 Estimating mdim over m_j = 2^j + 1 for j = {list(service.config.coupled_j)}...")
    report = service.run(subcommand="mdim")
    for j, m, eps, h, ratio, *_ in report.rows:
        print(f"📊 j={j} (m={m}, eps={eps:.4g}): h = {h:.4f}, h/|log eps| = {ratio:.4f}")
    final = report.summary[-1]
    print(f"✅ mdim estimate {final['mdim']:.4f} (final ratio {final['final_ratio']:.4f})")
    publish_report(service=service, report=report, out_dir=out_dir, copy=copy)
    return 0
