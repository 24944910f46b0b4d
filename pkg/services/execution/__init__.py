from services.execution.config import Ablation, FixtureConfig, PipelineConfig, SimulatorConfig
from services.execution.models import (
    CollisionEvent,
    ExecutionLog,
    GraspCandidate,
    GraspOffset,
    StepRecord,
    SubtaskOutcome,
    TrialResult,
    Workcell,
)
from services.execution.grasping import propose_grasps, select_grasp
from services.execution.simulator import KinematicSimulator
from services.execution.verification import VerificationResult, unmet_preconditions, verify_subtask, verify_with_selector
from services.execution.runner import plan_motion, run_subtask, run_task

__all__ = [
    "Ablation",
    "FixtureConfig",
    "PipelineConfig",
    "SimulatorConfig",
    "CollisionEvent",
    "ExecutionLog",
    "GraspCandidate",
    "GraspOffset",
    "StepRecord",
    "SubtaskOutcome",
    "TrialResult",
    "Workcell",
    "propose_grasps",
    "select_grasp",
    "KinematicSimulator",
    "VerificationResult",
    "unmet_preconditions",
    "verify_subtask",
    "verify_with_selector",
    "plan_motion",
    "run_subtask",
    "run_task",
]
