"""
Subtask execution loop: predict, refine, grasp, execute, verify, replan.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from services.adapters import ModelSuite
from services.core.geometry import placement_slot
from services.core.models import PlanningMode, Point3D, SceneState, SubtaskSpec, TaskPlan, Trajectory
from services.dynamics import Observation, predict_trajectory
from services.errors import AdapterUnavailableError, PipelineError, RemoteError
from services.execution.config import Ablation, PipelineConfig
from services.execution.grasping import propose_grasps, select_grasp
from services.execution.models import ExecutionLog, SubtaskOutcome, TrialResult, Workcell, failed_outcomes
from services.execution.simulator import KinematicSimulator
from services.execution.verification import unmet_preconditions, verify_with_selector
from services.optimization import build_obstacle_index, optimize_trajectory
from services.planning import replan_subtask

logger = logging.getLogger(__name__)


@dataclass
class _TrialState:
    scene: SceneState
    replans: int = 0
    collisions: int = 0
    logs: List[ExecutionLog] = field(default_factory=list)


# ---------------------------------------------------------------------
# Trajectory sources
# ---------------------------------------------------------------------
def straight_line_trajectory(scene: SceneState, subtask: SubtaskSpec) -> Trajectory:
    """Object centre to its placement slot, no intermediate waypoints."""
    start = scene.get_object(subtask.obj).position
    goal = placement_slot(scene, subtask.obj, subtask.loc)
    return Trajectory((start, goal), (0, 1), subtask.obj)


def approach_trajectory(predicted: Trajectory, approach_height: float) -> Trajectory:
    """Keep only the predicted end point, reached straight through a point above it."""
    start, final = predicted.waypoints[0], predicted.waypoints[-1]
    above = Point3D(final.x, final.y, final.z + approach_height)
    return Trajectory((start, above, final), (0, 1, 2), predicted.object_id)


def plan_motion(
    workcell: Workcell,
    scene: SceneState,
    subtask: SubtaskSpec,
    suite: ModelSuite,
    config: PipelineConfig,
    subtask_index: int = 0,
    attempt: int = 0,
) -> Trajectory:
    """
    World-frame trajectory for one subtask, refined against obstacles.

    Obstacles are the scene's obstacle points plus the centres of every other
    object.
    """
    if Ablation.FDP in config.ablations:
        traj = straight_line_trajectory(scene, subtask)
    else:
        observation = Observation(scene, workcell.intrinsics, workcell.extrinsics, subtask_index, attempt)
        traj = predict_trajectory(
            observation, subtask.guide, subtask.obj, suite, config.rdp, config.fixtures.rollout_frames
        )
        if Ablation.PATH in config.ablations:
            traj = approach_trajectory(traj, config.simulator.approach_height)

    points = list(scene.obstacles) + [o.position for o in scene.objects if o.id != subtask.obj]
    result = optimize_trajectory(traj, build_obstacle_index(points), config.optimizer)
    return result.trajectory


# ---------------------------------------------------------------------
# One subtask
# ---------------------------------------------------------------------
def _attempt_once(
    workcell: Workcell,
    state: _TrialState,
    subtask: SubtaskSpec,
    suite: ModelSuite,
    config: PipelineConfig,
    simulator: KinematicSimulator,
    subtask_index: int,
    attempt: int,
    seed: int,
) -> Optional[str]:
    """Run one attempt; returns None on success or the failure reason."""
    scene = state.scene
    traj = plan_motion(workcell, scene, subtask, suite, config, subtask_index, attempt)

    obj = scene.get_object(subtask.obj)
    offsets = workcell.grasps.get(subtask.obj)
    if offsets:
        candidates = [g.at(obj) for g in offsets]
    else:
        rng = np.random.default_rng(np.random.SeedSequence([seed, subtask_index, attempt]))
        candidates = propose_grasps(obj, rng, suite.noise.grasp_perturbation)
    grasp = select_grasp(candidates, suite, subtask.obj, subtask_index, attempt)

    scene, log = simulator.execute_trajectory(scene, traj, grasp)
    state.scene = scene
    state.logs.append(log)
    state.collisions += len(log.collisions)

    verdict = verify_with_selector(
        scene, subtask, suite, config.simulator.verify_tolerance, subtask_index, attempt
    )
    if verdict.passed:
        return None
    logger.warning(f"Subtask {subtask_index} attempt {attempt} failed verification: {verdict.reason}")
    return "verify"


def run_subtask(
    workcell: Workcell,
    state: _TrialState,
    subtask: SubtaskSpec,
    suite: ModelSuite,
    config: PipelineConfig,
    simulator: KinematicSimulator,
    subtask_index: int,
    mode: PlanningMode,
    seed: int,
) -> Tuple[SubtaskOutcome, Optional[PipelineError]]:
    """
    Attempt a subtask, replanning from the current scene after each failure.

    Returns:
        (outcome, last error if the subtask ended on an exception)
    """
    tolerance = config.simulator.verify_tolerance
    current = subtask
    reason: Optional[str] = None
    error: Optional[PipelineError] = None

    for attempt in range(config.simulator.replan_budget + 1):
        if attempt > 0:
            state.replans += 1
            try:
                current = replan_subtask(subtask, state.scene, suite, mode, subtask_index, attempt)
            except PipelineError as e:
                logger.error(f"Replanning subtask {subtask_index} failed: {e}")
                return SubtaskOutcome(subtask_index, subtask.obj, subtask.loc, False, "plan", attempt), e
            unmet = unmet_preconditions(state.scene, current, tolerance)
            if unmet:
                logger.warning(f"Replanned subtask {subtask_index} blocked by {', '.join(map(str, unmet))}")
                return SubtaskOutcome(subtask_index, subtask.obj, subtask.loc, False, "plan", attempt), None

        try:
            reason = _attempt_once(
                workcell, state, current, suite, config, simulator, subtask_index, attempt, seed
            )
            error = None
        except PipelineError as e:
            reason = e.failure_mode or "execute"
            error = e
            logger.warning(f"Subtask {subtask_index} attempt {attempt}: {type(e).__name__}: {e}")

        if reason is None:
            logger.info(f"Subtask {subtask_index} passed: {current.desc}")
            return SubtaskOutcome(subtask_index, subtask.obj, subtask.loc, True, None, attempt + 1), None

    return SubtaskOutcome(
        subtask_index, subtask.obj, subtask.loc, False, reason, config.simulator.replan_budget + 1
    ), error


# ---------------------------------------------------------------------
# Whole plan
# ---------------------------------------------------------------------
def run_task(
    workcell: Workcell,
    plan: TaskPlan,
    suite: ModelSuite,
    config: Optional[PipelineConfig] = None,
    expected_subtasks: Optional[int] = None,
    trial: int = 0,
    seed: int = 0,
    simulator: Optional[KinematicSimulator] = None,
) -> TrialResult:
    """
    Execute a validated plan subtask by subtask.

    A subtask whose preconditions do not hold in the current scene is never
    attempted and fails with reason "plan". Exhausted subtasks are marked
    failed and the run continues (or stops when ``stop_on_failure`` is set).
    An adapter that stays unavailable aborts the remaining subtasks with the
    same reason.

    Args:
        workcell: Scene, camera and grasp candidates
        plan: Plan validated against ``workcell.scene``
        suite: Model adapters
        config: Pipeline configuration
        expected_subtasks: Number of outcomes to report (default: plan length)
        trial: Trial index, for logs and the result
        seed: Trial seed
        simulator: Simulator instance owned by this trial

    Returns:
        TrialResult with exactly ``expected_subtasks`` outcomes
    """
    config = config or PipelineConfig()
    expected = expected_subtasks or len(plan)
    subtasks = plan.subtasks[:expected]
    pairs = [(s.obj, s.loc) for s in subtasks]
    tolerance = config.simulator.verify_tolerance

    simulator = simulator or KinematicSimulator(config.simulator)
    state = _TrialState(scene=workcell.scene)
    outcomes: List[SubtaskOutcome] = []

    for n, subtask in enumerate(subtasks):
        unmet = unmet_preconditions(state.scene, subtask, tolerance)
        if unmet:
            logger.warning(f"Subtask {n} skipped, unmet: {', '.join(map(str, unmet))}")
            outcome, error = SubtaskOutcome(n, subtask.obj, subtask.loc, False, "plan"), None
        else:
            logger.info(f"Subtask {n}: {subtask.desc}")
            outcome, error = run_subtask(
                workcell, state, subtask, suite, config, simulator, n, plan.provenance, seed
            )
        outcomes.append(outcome)

        if isinstance(error, (AdapterUnavailableError, RemoteError)):
            logger.error(f"Trial {trial} aborted at subtask {n}: {error}")
            outcomes += failed_outcomes(len(subtasks), outcome.reason, n + 1, pairs)
            break
        if not outcome.passed and config.simulator.stop_on_failure:
            logger.info(f"Trial {trial} stopped at subtask {n}")
            outcomes += failed_outcomes(len(subtasks), "plan", n + 1, pairs)
            break

    if len(outcomes) < expected:
        outcomes += failed_outcomes(expected, "plan", len(outcomes))

    result = TrialResult(trial, seed, tuple(outcomes), state.replans, state.collisions)
    logger.info(
        f"Trial {trial}: {result.n_i}/{expected} subtasks, {result.replans_used} replan(s), "
        f"{result.collision_events} collision event(s), simulator {simulator.instance_id}"
    )
    return result
