import logging
import os
from typing import Any, Dict, List, Optional, Sequence

from services.errors import ReportError
from services.harness.metrics import MetricsReport
from utils import write_json, write_trial_rows

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"
TRIALS_FILE = "trials.csv"
FORMATS = ("json", "csv")


def emit_report(
    report: MetricsReport,
    out_dir: str,
    formats: Sequence[str] = FORMATS,
    extra: Optional[Dict[str, Any]] = None,
) -> List[str]:
    """
    Write report.json (sorted keys) and/or trials.csv into ``out_dir``.

    Args:
        report: Computed metrics, including the per-trial rows and config echo
        out_dir: Output folder (created when missing)
        formats: Any of "json", "csv"
        extra: Additional top-level report fields (scenario, seed, ablations)

    Returns:
        Paths written

    Raises:
        ReportError: folder or file cannot be written
    """
    unknown = sorted(set(formats) - set(FORMATS))
    if unknown:
        raise ValueError(f"unknown report format(s) {unknown}, expected {FORMATS}")

    written = []
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise ReportError(e.strerror or str(e), out_dir) from e

    if "json" in formats:
        path = os.path.join(out_dir, REPORT_FILE)
        try:
            written.append(write_json(path, {**(extra or {}), **report.to_dict()}))
        except OSError as e:
            raise ReportError(e.strerror or str(e), path) from e
    if "csv" in formats:
        path = os.path.join(out_dir, TRIALS_FILE)
        try:
            write_trial_rows(path, [t.to_dict() for t in report.trials])
        except OSError as e:
            raise ReportError(e.strerror or str(e), path) from e
        written.append(path)

    logger.info(f"Report written to {out_dir} ({', '.join(os.path.basename(p) for p in written)})")
    return written
