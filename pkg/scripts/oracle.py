"""Oracle tables: exact DP window counts against the Gibbs maximum, or weighted-shift bounds."""

from pathlib import Path

from mdim_spectra.services.experiment_service import ExperimentService
from scripts.report_output import publish_report


def main(*, service: ExperimentService, out_dir: Path, copy: bool = False) -> int:
    """Run the oracle for the configured system and write its reports.

    Returns:
        Exit status, always 0.
    """
    print(f"🔄 Running oracles for {service.system.key}...")
    report = service.run(subcommand="oracle")
    for record in report.summary:
        if record["section"] == "dp-gibbs":
            trend = "shrinks" if record["gap_shrinks"] else "does not shrink"
            print(f"📊 alpha={record['alpha']}: H*={record['gibbs_entropy']:.6f}, gap {trend}")
        elif record["section"] == "weighted-shift":
            print(
                f"📊 eps={record['epsilon']}: lower ratio {record['lower_ratio']:.4f}, "
                f"upper ratio {record['upper_ratio']:.4f}"
            )
        else:
            valid = "✅" if record["cover_valid"] and record["grid_non_strict"] else "❌"
            print(f"{valid} certificates at eps={record['epsilon']}: grid of {record['grid_points']} points")
    publish_report(service=service, report=report, out_dir=out_dir, copy=copy)
    return 0
