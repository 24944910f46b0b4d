"""
Command-line harness: run, batch, metrics, validate.

Exit codes: 0 ok, 1 usage, 2 validation, 3 runtime.
"""
import logging
import os
import sys
from typing import List, Optional

import coloredlogs
import typer
from rich.console import Console
from rich.table import Table

from config.settings import BATCH_SEED, BATCH_TRIALS, FOLDER_REPORTS, LOG_FILE, LOG_FORMAT, LOG_LEVEL
from services.core.models import PlanningMode
from services.errors import PipelineError, ReportError, ScenarioError
from services.execution import Ablation, TrialResult
from services.harness.batch import run_batch
from services.harness.metrics import MetricsReport, compute_metrics, load_trials
from services.harness.report import FORMATS, emit_report
from services.harness.scenario import Scenario, load_scenario, with_mode

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

# usage-error base of whichever click build typer raises from
USAGE_ERROR = next(c for c in typer.BadParameter.__mro__ if c.__name__ == "UsageError")

logger = logging.getLogger(__name__)

app = typer.Typer(add_completion=False, no_args_is_help=True, help="Demonstration-to-trajectory pipeline harness.")
console = Console()
err_console = Console(stderr=True)


def setup_logging(verbose: bool = False):
    """Colored console logging plus an optional log file (D2T_LOG_FILE)."""
    level = "DEBUG" if verbose else LOG_LEVEL
    coloredlogs.install(level=level, fmt=LOG_FORMAT)
    if LOG_FILE and not any(isinstance(h, logging.FileHandler) for h in logging.getLogger().handlers):
        folder = os.path.dirname(LOG_FILE)
        if folder:
            os.makedirs(folder, exist_ok=True)
        handler = logging.FileHandler(LOG_FILE, encoding="utf-8")
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logging.getLogger().addHandler(handler)


# ---------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------
def _load(path: str, mode: Optional[PlanningMode]) -> Scenario:
    try:
        scenario = load_scenario(path)
        return with_mode(scenario, mode) if mode else scenario
    except ScenarioError as e:
        err_console.print(f"[red]invalid scenario[/red] {e}")
        raise typer.Exit(EXIT_VALIDATION)


def _summary_table(title: str, report: MetricsReport) -> Table:
    table = Table(title=title)
    table.add_column("N", justify="right")
    table.add_column("M", justify="right")
    table.add_column("TSR", justify="right")
    table.add_column("SSR", justify="right")
    table.add_column("failures")
    failures = ", ".join(f"{k}={v}" for k, v in report.failure_histogram.items()) or "-"
    table.add_row(str(report.N), str(report.M), f"{float(report.TSR):.2f}", f"{float(report.SSR):.2f}", failures)
    return table


def _trial_table(result: TrialResult) -> Table:
    table = Table(title=f"Trial {result.trial} (seed {result.seed})")
    table.add_column("#", justify="right")
    table.add_column("object")
    table.add_column("destination")
    table.add_column("result")
    table.add_column("attempts", justify="right")
    for o in result.subtask_outcomes:
        status = "[green]pass[/green]" if o.passed else f"[red]fail ({o.reason})[/red]"
        table.add_row(str(o.index), o.obj or "-", o.loc or "-", status, str(o.attempts))
    return table


def _emit(report: MetricsReport, out: str, formats: List[str], extra: dict):
    try:
        for path in emit_report(report, out, formats, extra):
            console.print(f"wrote {path}")
    except ReportError as e:
        err_console.print(f"[red]cannot write report[/red] {e}")
        raise typer.Exit(EXIT_RUNTIME)


def _check_formats(formats: List[str]) -> List[str]:
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise typer.BadParameter(f"unknown format(s) {bad}, expected {list(FORMATS)}", param_hint="--format")
    return formats


# ---------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------
@app.command()
def run(
    scenario: str = typer.Option(..., "--scenario", "-s", help="Scenario JSON file"),
    seed: int = typer.Option(BATCH_SEED, "--seed"),
    mode: Optional[PlanningMode] = typer.Option(None, "--mode", help="Override the scenario's planning mode"),
    ablate: List[Ablation] = typer.Option([], "--ablate", help="fdp, path or parsing (repeatable)"),
    out: Optional[str] = typer.Option(None, "--out", help="Write report files to this folder"),
    fmt: List[str] = typer.Option(list(FORMATS), "--format", help="json and/or csv"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Run a single trial with verbose logging."""
    setup_logging(verbose)
    formats = _check_formats(fmt)
    loaded = _load(scenario, mode)
    config = loaded.config.with_ablations(ablate) if ablate else loaded.config
    try:
        results = run_batch(loaded, 1, seed, config=config)
    except PipelineError as e:
        err_console.print(f"[red]run failed[/red] {e}")
        raise typer.Exit(EXIT_RUNTIME)
    console.print(_trial_table(results[0]))
    if out:
        report = compute_metrics(results, loaded.expected_subtasks, config.echo())
        _emit(report, out, formats, {"scenario": loaded.name, "seed": seed, "mode": loaded.mode.value})


@app.command()
def batch(
    scenario: str = typer.Option(..., "--scenario", "-s", help="Scenario JSON file"),
    trials: int = typer.Option(BATCH_TRIALS, "--trials", "-n", min=1),
    seed: int = typer.Option(BATCH_SEED, "--seed"),
    mode: Optional[PlanningMode] = typer.Option(None, "--mode", help="Override the scenario's planning mode"),
    ablate: List[Ablation] = typer.Option([], "--ablate", help="fdp, path or parsing (repeatable)"),
    out: Optional[str] = typer.Option(None, "--out", help="Report folder (default reports/<scenario>)"),
    fmt: List[str] = typer.Option(list(FORMATS), "--format", help="json and/or csv"),
    workers: int = typer.Option(1, "--workers", min=1),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Run N seeded trials, compute TSR/SSR and write the report."""
    setup_logging(verbose)
    formats = _check_formats(fmt)
    loaded = _load(scenario, mode)
    config = loaded.config.with_ablations(ablate) if ablate else loaded.config
    try:
        results = run_batch(loaded, trials, seed, config=config, workers=workers, progress=not verbose)
        report = compute_metrics(results, loaded.expected_subtasks, config.echo())
    except PipelineError as e:
        err_console.print(f"[red]batch failed[/red] {e}")
        raise typer.Exit(EXIT_RUNTIME)
    console.print(_summary_table(f"{loaded.name} ({loaded.mode.value})", report))
    extra = {"scenario": loaded.name, "seed": seed, "mode": loaded.mode.value}
    _emit(report, out or os.path.join(FOLDER_REPORTS, loaded.name), formats, extra)


@app.command()
def metrics(
    trials_csv: str = typer.Argument(..., help="trials.csv written by a batch"),
    subtasks: Optional[int] = typer.Option(None, "--subtasks", "-m", min=1, help="Expected subtasks M"),
    scenario: Optional[str] = typer.Option(None, "--scenario", "-s", help="Take M from this scenario"),
    out: Optional[str] = typer.Option(None, "--out", help="Write report files to this folder"),
    fmt: List[str] = typer.Option(["json"], "--format", help="json and/or csv"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Recompute TSR/SSR from a trials.csv file."""
    setup_logging(verbose)
    formats = _check_formats(fmt)
    if subtasks is None and scenario is None:
        raise typer.BadParameter("give --subtasks or --scenario", param_hint="--subtasks")
    M = subtasks if subtasks is not None else _load(scenario, None).expected_subtasks
    try:
        report = compute_metrics(load_trials(trials_csv), M)
    except (OSError, ValueError) as e:
        err_console.print(f"[red]cannot compute metrics[/red] {trials_csv}: {e}")
        raise typer.Exit(EXIT_VALIDATION)
    console.print(_summary_table(os.path.basename(trials_csv), report))
    if out:
        _emit(report, out, formats, {"source": os.path.basename(trials_csv)})


@app.command()
def validate(
    scenario: str = typer.Option(..., "--scenario", "-s", help="Scenario JSON file"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Lint a scenario file."""
    setup_logging(verbose)
    loaded = _load(scenario, None)
    demo = f"{len(loaded.demonstration)} frames" if loaded.demonstration is not None else "none"
    console.print(
        f"[green]ok[/green] {loaded.name}: mode {loaded.mode.value}, M={loaded.expected_subtasks}, "
        f"{len(loaded.scene.objects)} objects, {len(loaded.scene.regions)} regions, "
        f"{len(loaded.scene.obstacles)} obstacle points, demonstration {demo}"
    )


# ---------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------
def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and map failures onto the documented exit codes."""
    command = typer.main.get_command(app)
    try:
        # without standalone mode click returns the code of typer.Exit
        code = command.main(args=argv, prog_name="d2t", standalone_mode=False)
    except typer.Exit as e:
        return e.exit_code
    except typer.Abort:
        err_console.print("aborted")
        return EXIT_RUNTIME
    except USAGE_ERROR as e:
        e.show(file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as e:
        err_console.print(f"[red]invalid scenario[/red] {e}")
        return EXIT_VALIDATION
    except (PipelineError, OSError) as e:
        logger.exception(f"Run failed: {e}")
        return EXIT_RUNTIME
    return code if isinstance(code, int) else EXIT_OK
