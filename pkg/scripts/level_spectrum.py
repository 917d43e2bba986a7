"""Level-set spectrum Lambda_phi(alpha, eps) over the configured alpha grid."""

from pathlib import Path

from mdim_spectra.services.experiment_service import ExperimentService
from scripts.report_output import publish_report


def main(*, service: ExperimentService, out_dir: Path, copy: bool = False) -> int:
    """Run the spectrum table and write its reports.

    Returns:
        0 when every reachable cell lies within tolerance of H*(alpha), 1 otherwise.
    """
    print(f"🔄 Counting level windows of {service.phi.name} on {service.system.key}...")
    report = service.run(subcommand="level-spectrum")
    empty = sum(1 for record in report.summary if record["empty"])
    print(f"📊 {len(report.summary)} cells, {empty} empty")
    for record in report.summary:
        if record["pass"] is False:
            print(f"❌ alpha={record['alpha']}: Lambda={record['lambda']:.4f} gap to H*={record['gap']:.4f}")
    publish_report(service=service, report=report, out_dir=out_dir, copy=copy)
    if not report.passed:
        print("❌ Level-set spectrum is off H* beyond tolerance")
        return 1
    return 0
