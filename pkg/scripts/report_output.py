"""Shared console output for the experiment scripts."""

from pathlib import Path

from mdim_spectra.services.experiment_service import ExperimentService, RunReport


def publish_report(*, service: ExperimentService, report: RunReport, out_dir: Path, copy: bool) -> None:
    """Write the report files, print the summary and optionally copy it.

    Args:
        service: Service that produced the report.
        report: Finished report.
        out_dir: Directory receiving the files.
        copy: Put the text summary on the clipboard.
    """
    paths = service.write_report(report=report, out_dir=out_dir)
    summary = service.render_summary(report=report)

    print("\n" + "=" * 60)
    print(summary.rstrip())
    print("=" * 60)
    for path in paths:
        print(f"💾 Wrote {path}")

    if copy:
        try:
            import pyperclip

            pyperclip.copy(summary)
            print("✅ Summary copied to clipboard!")
        except ImportError:
            print("❌ Could not copy to clipboard. Install 'pyperclip' for this feature.")
            print("💡 Command: pip install pyperclip")
