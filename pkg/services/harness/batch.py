"""
Seeded trial batches: parse, plan and execute one scenario N times.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from services.adapters import FaultInjection, ModelSuite, build_suite
from services.core.models import PlanningMode, SceneState, TaskPlan
from services.errors import PipelineError
from services.execution import Ablation, KinematicSimulator, PipelineConfig, TrialResult, run_task
from services.execution.models import failed_outcomes
from services.harness.scenario import Scenario
from services.keyframes import describe_keyframes, extract_keyframes
from services.planning import PlanningRequest, abstract_demonstration, scene_summary, unify_plan

logger = logging.getLogger(__name__)


def trial_seed(seed: int, trial: int) -> int:
    """Seed of trial ``trial`` in a batch seeded with ``seed``."""
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


def plan_scenario(scenario: Scenario, scene: SceneState, suite: ModelSuite, config: PipelineConfig) -> TaskPlan:
    """
    Demonstration (and language) to an executable plan.

    Without the parsing stage every frame is captioned and handed to the
    planner instead of the extracted keyframes.
    """
    baseline = None
    if scenario.demonstration is not None and scenario.mode != PlanningMode.TEXT_ONLY:
        stream = scenario.demonstration
        if Ablation.PARSING in config.ablations:
            frames = stream.frame_indices
        else:
            frames = extract_keyframes(stream, config.keyframes)
        descriptors = describe_keyframes(stream, frames, scenario.labels)
        baseline = abstract_demonstration(descriptors, suite)

    request = PlanningRequest(
        baseline=baseline,
        scene_summary=tuple(scene_summary(scene)),
        language=scenario.language,
        mode=scenario.mode,
    )
    return unify_plan(request, suite)


def run_trial(
    scenario: Scenario,
    trial: int,
    seed: int,
    config: Optional[PipelineConfig] = None,
    faults: Iterable[FaultInjection] = (),
) -> TrialResult:
    """
    One full pipeline run. Errors are captured into the result.

    A planning failure fails every expected subtask with reason "plan".
    """
    config = config or scenario.config
    expected = scenario.expected_subtasks
    suite = build_suite(
        config.adapters,
        seed=seed,
        faults=faults,
        noise=config.fixtures.noise(),
        lift_height=config.fixtures.lift_height,
        context_budget=config.fixtures.planner_context,
    )
    try:
        simulator = KinematicSimulator(config.simulator)
        workcell = scenario.workcell(seed)
        try:
            plan = plan_scenario(scenario, workcell.scene, suite, config)
        except PipelineError as e:
            logger.error(f"Trial {trial}: planning failed: {type(e).__name__}: {e}")
            return TrialResult(trial, seed, tuple(failed_outcomes(expected, "plan")))
        return run_task(workcell, plan, suite, config, expected, trial, seed, simulator)
    except Exception as e:
        logger.exception(f"Trial {trial} crashed: {e}")
        return TrialResult(trial, seed, tuple(failed_outcomes(expected, "execute")))
    finally:
        suite.close()


def run_batch(
    scenario: Scenario,
    trials: int,
    seed: int = 0,
    ablations: Sequence[str] = (),
    config: Optional[PipelineConfig] = None,
    faults: Iterable[FaultInjection] = (),
    workers: int = 1,
    progress: bool = False,
) -> List[TrialResult]:
    """
    Run ``trials`` independent trials; trial i uses ``trial_seed(seed, i)``.

    Args:
        scenario: Loaded scenario
        trials: Number of trials N (>= 1)
        seed: Batch seed
        ablations: Any of "fdp", "path", "parsing"
        config: Pipeline configuration (default: the scenario's)
        faults: Scripted adapter faults applied to every trial
        workers: Thread pool size
        progress: Show a progress bar

    Returns:
        Results ordered by trial index
    """
    if trials < 1:
        raise ValueError("a batch needs at least one trial")
    config = config or scenario.config
    if ablations:
        config = config.with_ablations(ablations)
    faults = tuple(faults)
    before = KinematicSimulator.instances_created()
    label = ",".join(a.value for a in config.ablations) or "full"
    logger.info(f"Batch {scenario.name} [{label}]: {trials} trial(s), seed {seed}, {workers} worker(s)")

    def task(i: int) -> TrialResult:
        return run_trial(scenario, i, trial_seed(seed, i), config, faults)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(tqdm(
            pool.map(task, range(trials)),
            total=trials,
            desc=f"{scenario.name} [{label}]",
            disable=not progress,
        ))

    created = KinematicSimulator.instances_created() - before
    logger.info(f"Batch {scenario.name} [{label}] finished: {created} simulator instance(s)")
    return results
