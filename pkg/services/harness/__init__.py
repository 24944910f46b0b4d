from services.harness.scenario import Scenario, load_scenario, scenario_json_schema, with_mode
from services.harness.batch import plan_scenario, run_batch, run_trial, trial_seed
from services.harness.metrics import MetricsReport, TrialSummary, compute_metrics, load_trials
from services.harness.report import emit_report

__all__ = [
    "Scenario",
    "load_scenario",
    "scenario_json_schema",
    "with_mode",
    "plan_scenario",
    "run_batch",
    "run_trial",
    "trial_seed",
    "MetricsReport",
    "TrialSummary",
    "compute_metrics",
    "load_trials",
    "emit_report",
]
