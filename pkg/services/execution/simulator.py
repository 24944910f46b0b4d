"""
Kinematic point-gripper simulator.

The gripper follows the trajectory shifted so that it starts at the grasp
pose; a held object keeps its grasp offset to the gripper. Motion is linear
interpolation between waypoints at a fixed step length.
"""
import logging
import math
import threading
from dataclasses import replace
from typing import Optional, Tuple

import numpy as np

from services.core.models import Point3D, SceneState, Trajectory
from services.errors import GraspFailureError
from services.execution.config import SimulatorConfig
from services.execution.models import CollisionEvent, ExecutionLog, GraspCandidate, StepRecord
from services.optimization.obstacles import build_obstacle_index

logger = logging.getLogger(__name__)


class KinematicSimulator:
    """One simulator owns the scene updates of one trial."""

    _created = 0
    _lock = threading.Lock()

    def __init__(self, config: Optional[SimulatorConfig] = None):
        self.config = config or SimulatorConfig()
        with KinematicSimulator._lock:
            KinematicSimulator._created += 1
            self.instance_id = KinematicSimulator._created
        logger.info(f"Simulator instance {self.instance_id} created")

    @classmethod
    def instances_created(cls) -> int:
        with cls._lock:
            return cls._created

    # -----------------------------------------------------------------

    def _interpolate(self, waypoints: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Points every ``step_length`` along the polyline plus the segment each lies on."""
        points = [waypoints[0]]
        segments = [0]
        for m in range(len(waypoints) - 1):
            a, b = waypoints[m], waypoints[m + 1]
            steps = max(1, math.ceil(np.linalg.norm(b - a) / self.config.step_length))
            for j in range(1, steps + 1):
                points.append(a + (b - a) * (j / steps))
                segments.append(m)
        return np.array(points), np.array(segments)

    def execute_trajectory(
        self,
        scene: SceneState,
        traj: Trajectory,
        grasp: GraspCandidate,
    ) -> Tuple[SceneState, ExecutionLog]:
        """
        Carry ``traj.object_id`` along the trajectory and release it at the end.

        An obstacle point within the clearance knocks the held object loose where
        it is (back at its resting height, flagged disturbed) and the gripper
        finishes the motion empty. Another object within the clearance of the
        gripper is flagged disturbed.

        Args:
            scene: Scene before execution (not modified)
            traj: World-frame trajectory, at least two waypoints
            grasp: Selected grasp for the trajectory's object

        Returns:
            (scene after release, execution log)

        Raises:
            GraspFailureError: grasp farther than ``grasp_radius`` from the object
        """
        if not traj.is_executable:
            raise ValueError("trajectory needs at least two waypoints to execute")
        obj = scene.get_object(traj.object_id)
        if obj is None:
            raise KeyError(f"object {traj.object_id} is not in the scene")

        grasp_pose = grasp.pose.as_array()
        start = obj.position.as_array()
        gap = float(np.linalg.norm(grasp_pose - start))
        if gap > self.config.grasp_radius:
            raise GraspFailureError(
                f"grasp {grasp.id} is {gap:.3f} m from {obj.id} (radius {self.config.grasp_radius} m)"
            )

        waypoints = traj.as_array()
        path, segments = self._interpolate(waypoints + (grasp_pose - waypoints[0]))
        carry = start - grasp_pose
        resting_z = obj.position.z

        index = build_obstacle_index(scene.obstacles)
        others = [o for o in scene.objects if o.id != obj.id]
        touched = set()
        log = ExecutionLog(simulator_id=self.instance_id)
        held: Optional[str] = obj.id
        position = start

        for k, (gripper, segment) in enumerate(zip(path, segments)):
            if held is not None:
                position = gripper + carry

            if not index.is_empty:
                distance, nearest = index.nearest(gripper)
                if distance < self.config.clearance:
                    log.collisions.append(CollisionEvent(k, int(segment), distance, "obstacle", f"point {nearest}"))
                    if held is not None:
                        logger.warning(f"Simulator {self.instance_id}: {held} knocked loose at step {k}")
                        position = np.array([position[0], position[1], resting_z])
                        held = None
                        log.outcome = "dropped"

            for other in others:
                distance = float(np.linalg.norm(gripper - other.position.as_array())) - other.radius
                if distance < self.config.clearance:
                    log.collisions.append(CollisionEvent(k, int(segment), distance, "object", other.id))
                    touched.add(other.id)

            # recorded after the checks: a knock-loose step is already empty-handed
            log.steps.append(StepRecord(k, Point3D.from_seq(gripper), held))

        moved = replace(obj, position=Point3D.from_seq(position), disturbed=log.outcome == "dropped")
        result = scene.with_object(moved)
        for other in others:
            if other.id in touched:
                result = result.with_object(replace(other, disturbed=True))

        logger.debug(
            f"Simulator {self.instance_id}: {obj.id} {log.outcome} after {len(log.steps)} steps, "
            f"{len(log.collisions)} collision event(s)"
        )
        return result, log
