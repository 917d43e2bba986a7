"""Moran construction transcript and Entropy Distribution Principle bound."""

from pathlib import Path

from mdim_spectra.services.experiment_service import ExperimentService
from scripts.report_output import publish_report


def main(*, service: ExperimentService, out_dir: Path, copy: bool = False) -> int:
    """Build the configured stages and write the transcript.

    Returns:
        Exit status, 0 when every stage keeps its Birkhoff control and its EDP bound stays near Lambda.
    """
    config = service.config
    print(f"🔄 Gluing {len(config.moran_n)} stage(s) at alpha={config.moran_alpha}, eps={config.moran_epsilon}...")
    report = service.run(subcommand="spec-demo")
    for record in report.summary:
        mark = "✅" if record["birkhoff_holds"] and record["edp_pass"] else "❌"
        print(
            f"{mark} stage {record['k']}: #T={record['t_count']} t={record['t_k']} "
            f"EDP={record['edp']:.4f} Lambda={record['lambda']:.4f}"
        )
    publish_report(service=service, report=report, out_dir=out_dir, copy=copy)
    return 0 if report.passed else 1
