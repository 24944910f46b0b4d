"""
Ablation study on one scenario.

Runs the full pipeline and each single-component ablation over the same
seeded batch and prints a TSR/SSR table. Reports land in
reports/<scenario>/<variant>/.

Note: Edit the configuration below, then run from the repository root.
"""

import logging
import os

from rich.console import Console
from rich.table import Table

from config.settings import BATCH_SEED, BATCH_TRIALS, FOLDER_REPORTS, FOLDER_SCENARIOS
from services.execution import Ablation
from services.harness import compute_metrics, emit_report, load_scenario, run_batch
from services.harness.cli import setup_logging

# ============================================================================
# CONFIGURATION
# ============================================================================

SCENARIO_PATH = os.path.join(FOLDER_SCENARIOS, "tidy_up.json")
TRIALS = BATCH_TRIALS
SEED = BATCH_SEED
WORKERS = 4

# Variant name -> ablations switched on
VARIANTS = {
    "full": (),
    "w/o fdp": (Ablation.FDP,),
    "w/o path": (Ablation.PATH,),
    "w/o parsing": (Ablation.PARSING,),
}

logger = logging.getLogger(__name__)


def run_ablation_study(path: str = SCENARIO_PATH, trials: int = TRIALS, seed: int = SEED) -> dict:
    """Metrics per variant, keyed by variant name."""
    scenario = load_scenario(path)
    reports = {}
    for name, ablations in VARIANTS.items():
        config = scenario.config.with_ablations(ablations)
        results = run_batch(scenario, trials, seed, config=config, workers=WORKERS)
        report = compute_metrics(results, scenario.expected_subtasks, config.echo())
        folder = os.path.join(FOLDER_REPORTS, scenario.name, name.replace("w/o ", "without_"))
        emit_report(report, folder, extra={"scenario": scenario.name, "seed": seed, "variant": name})
        reports[name] = report

    table = Table(title=f"{scenario.name}: {trials} trials, seed {seed}")
    table.add_column("variant")
    table.add_column("TSR", justify="right")
    table.add_column("SSR", justify="right")
    table.add_column("failures")
    for name, report in reports.items():
        failures = ", ".join(f"{k}={v}" for k, v in report.failure_histogram.items()) or "-"
        table.add_row(name, f"{float(report.TSR):.2f}", f"{float(report.SSR):.2f}", failures)
    Console().print(table)
    return reports


# ============================================================================
# Script entry point
# ============================================================================

if __name__ == "__main__":
    setup_logging()
    run_ablation_study()
