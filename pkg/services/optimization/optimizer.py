import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import orjson

from services.core.geometry import turning_angles
from services.core.models import Trajectory
from services.optimization.costs import cost_gradient, total_cost
from services.optimization.obstacles import ObstacleIndex
from services.optimization.params import OptParams

logger = logging.getLogger(__name__)

# Gradients below this norm count as stationary
GRADIENT_EPS = 1e-12


@dataclass(frozen=True)
class IterationRecord:
    iter: int
    cost: float
    step: float

    def to_dict(self) -> dict:
        return {"iter": self.iter, "cost": self.cost, "step": self.step}


@dataclass(frozen=True)
class OptimizationResult:
    """Refined trajectory and the accepted-step log."""
    trajectory: Trajectory
    initial_cost: float
    final_cost: float
    iterations: List[IterationRecord] = field(default_factory=list)
    stop_reason: str = "converged"

    def to_jsonl(self) -> str:
        """Iteration log as JSON lines (iter, cost, step)."""
        return "".join(orjson.dumps(r.to_dict()).decode() + "\n" for r in self.iterations)


def _project(candidate: np.ndarray, anchor: np.ndarray, radius: float) -> np.ndarray:
    """Project each row onto the ball of ``radius`` around the matching anchor row."""
    offset = candidate - anchor
    norms = np.linalg.norm(offset, axis=1)
    scale = np.where(norms > radius, radius / np.maximum(norms, 1e-300), 1.0)
    return anchor + offset * scale[:, None]


def optimize_trajectory(
    traj: Trajectory,
    index: ObstacleIndex,
    params: Optional[OptParams] = None,
) -> OptimizationResult:
    """
    Refine interior waypoints by projected gradient descent.

    Each iteration takes a normalised steepest-descent step (the waypoint with
    the largest gradient moves ``step_size`` metres), projects interior
    waypoints back into the trust ball around their input positions and
    backtracks by ``shrink_factor`` until the projected Armijo condition holds.
    Endpoints never move. Stops after ``max_iters`` accepted steps, when the
    improvement falls below ``cost_tol`` or when the line search fails.

    Args:
        traj: Input trajectory (world frame)
        index: Obstacle index
        params: Optimizer parameters (defaults from config)

    Returns:
        OptimizationResult with the refined trajectory and iteration log
    """
    params = params or OptParams()
    anchor = traj.as_array()
    current = anchor.copy()
    cost = total_cost(current, index, params)
    initial_cost = cost

    if len(traj) < 3:
        return OptimizationResult(traj, cost, cost, [], "no-interior-waypoints")

    records: List[IterationRecord] = []
    stop_reason = "max-iters"
    for iteration in range(1, params.max_iters + 1):
        grad = cost_gradient(current, index, params)
        largest = float(np.max(np.linalg.norm(grad, axis=1)))
        if largest < GRADIENT_EPS or not math.isfinite(largest):
            stop_reason = "zero-gradient"
            break

        alpha = params.step_size / largest
        accepted = None
        for _ in range(params.max_backtracks):
            trial = current.copy()
            trial[1:-1] = _project(current[1:-1] - alpha * grad, anchor[1:-1], params.max_displacement)
            trial_cost = total_cost(trial, index, params)
            descent = float(np.sum(grad * (trial[1:-1] - current[1:-1])))
            if trial_cost <= cost + params.armijo * descent and trial_cost < cost:
                accepted = (trial, trial_cost)
                break
            alpha *= params.shrink_factor

        if accepted is None:
            stop_reason = "line-search"
            break

        trial, trial_cost = accepted
        step = float(np.max(np.linalg.norm(trial - current, axis=1)))
        improvement = cost - trial_cost
        current, cost = trial, trial_cost
        records.append(IterationRecord(iteration, cost, step))
        logger.debug(f"iter {iteration}: cost={cost:.6g} step={step:.3g}")
        if improvement < params.cost_tol:
            stop_reason = "converged"
            break

    current[0], current[-1] = anchor[0], anchor[-1]
    refined = traj.with_positions(current) if records else traj
    before = max(turning_angles(traj), default=0.0)
    after = max(turning_angles(refined), default=0.0)
    logger.debug(
        f"Optimized {traj.object_id}: cost {initial_cost:.4g} -> {cost:.4g} in {len(records)} steps "
        f"({stop_reason}); max turn {math.degrees(before):.1f} -> {math.degrees(after):.1f} deg"
    )
    return OptimizationResult(refined, initial_cost, cost, records, stop_reason)
