"""Measure-theoretic level entropy H_phi(alpha, eps)."""

from pathlib import Path

from mdim_spectra.services.experiment_service import ExperimentService
from scripts.report_output import publish_report


def main(*, service: ExperimentService, out_dir: Path, copy: bool = False) -> int:
    """Run h_phi over the alpha grid and write its reports.

    Returns:
        Exit status, always 0.
    """
    print(f"🔄 Computing entropy rates of the {service.config.measure_kind} family...")
    report = service.run(subcommand="hphi")
    for row in report.rows:
        if row[7]:
            print(f"❌ alpha={row[1]}: no measure integrates {service.phi.name} to alpha")
        else:
            print(f"📊 eps={row[0]} alpha={row[1]}: h_phi = {row[2]:.6f}")
    publish_report(service=service, report=report, out_dir=out_dir, copy=copy)
    return 0
