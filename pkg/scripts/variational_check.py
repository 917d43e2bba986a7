"""Joint Lambda / H_phi / Bowen table with pass/fail per alpha."""

from pathlib import Path

from mdim_spectra.services.experiment_service import ExperimentService
from scripts.report_output import publish_report


def main(*, service: ExperimentService, out_dir: Path, copy: bool = False) -> int:
    """Run the variational check and write its reports.

    Returns:
        0 when every row passes, 1 otherwise.
    """
    config = service.config
    print(
        f"🔄 Comparing Lambda with H_phi at tolerance {config.tolerance_variational} nats "
        f"and with the Bowen exponent at {config.tolerance_bowen} nats..."
    )
    report = service.run(subcommand="variational-check")
    reached = {record["alpha"] for record in report.summary}
    for alpha in config.alpha:
        if alpha not in reached:
            print(f"❌ alpha={alpha}: level window is empty")
    for record in report.summary:
        mark = "✅" if record["pass"] else "❌"
        bowen = "n/a" if record["bowen"] is None else f"{record['bowen']:.4f}"
        print(
            f"{mark} alpha={record['alpha']}: Lambda={record['lambda']:.4f} H_phi={record['h_phi']:.4f} "
            f"|diff|={record['difference']:.4f} Bowen={bowen}"
        )
    publish_report(service=service, report=report, out_dir=out_dir, copy=copy)
    if not report.passed:
        print("❌ Variational check failed")
        return 1
    print("✅ Variational check passed")
    return 0
