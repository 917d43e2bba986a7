"""Entropy at scale: h(f, eps) for every configured eps."""

from pathlib import Path

from mdim_spectra.services.experiment_service import ExperimentService
from scripts.report_output import publish_report


def main(*, service: ExperimentService, out_dir: Path, copy: bool = False) -> int:
    """Run the entropy sweep and write its reports.

    Returns:
        Exit status, always 0.
    """
    scales = ", ".join(str(eps) for eps in service.config.epsilon)
    print(f"🔄 Counting separated sets on {service.system.key} at eps = {scales}...")
    report = service.run(subcommand="entropy-scale")
    for record in report.summary:
        flag = " (lower bound)" if record["lower_bound"] else ""
        note = "" if record["converged"] else ", not converged"
        print(f"📊 eps={record['epsilon']}: h = {record['h']:.6f} (slope {record['cross_check']:.6f}{note}){flag}")
    publish_report(service=service, report=report, out_dir=out_dir, copy=copy)
    return 0
