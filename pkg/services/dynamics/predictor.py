import logging
from typing import Dict, Optional

import numpy as np

from config.settings import FIXTURE_ROLLOUT_FRAMES
from services.adapters import AdapterRole, ModelSuite
from services.core.models import Point2D, Trajectory
from services.dynamics.camera import backproject, depth_at
from services.dynamics.models import FutureRollout, Observation, RdpParams, RolloutFrame
from services.dynamics.rdp import rdp_indices
from services.errors import HallucinationError, SchemaViolationError, TrackingError

logger = logging.getLogger(__name__)


def _parse_depth(entries: Dict[str, float]) -> Dict[tuple, float]:
    depth = {}
    for key, z in entries.items():
        try:
            u, v = key.split(",")
            depth[(int(u), int(v))] = float(z)
        except ValueError as e:
            raise SchemaViolationError(f"bad depth key '{key}'", raw=entries) from e
    return depth


# ---------------------------------------------------------------------
# Rollout
# ---------------------------------------------------------------------
def imagine_future(
    observation: Observation,
    guide: str,
    target: str,
    suite: ModelSuite,
    frames: int = FIXTURE_ROLLOUT_FRAMES,
) -> FutureRollout:
    """
    Imagine how the subtask plays out and track the target through it.

    Args:
        observation: Scene and camera before the subtask
        guide: Generation prompt (mentions target and destination)
        target: Object expected to move
        suite: Model adapters (generator, tracker, depth)
        frames: Rollout length Q

    Returns:
        FutureRollout with the target tracked in every frame

    Raises:
        HallucinationError: generated frames lose the target
        TrackingError: tracker cannot follow the target
        AdapterUnavailableError / SchemaViolationError: adapter failures
    """
    if not guide.strip():
        raise ValueError("guide must be non-empty")

    base = {"subtask_index": observation.subtask_index, "attempt": observation.attempt}
    intrinsics = observation.intrinsics.to_dict()

    generated = suite.call(AdapterRole.GENERATOR, {
        **base,
        "guide": guide,
        "target": target,
        "scene": observation.scene.to_dict(),
        "camera": observation.camera_dict(),
        "frames": frames,
    })["frames"]
    lost = [k for k, frame in enumerate(generated) if target not in frame["objects"]]
    if lost:
        raise HallucinationError(f"rollout lost {target} in {len(lost)} of {len(generated)} frames")

    tracks = suite.call(AdapterRole.TRACKER, {
        **base, "object_id": target, "frames": generated, "intrinsics": intrinsics,
    })["tracks"]
    if len(tracks) != len(generated):
        raise SchemaViolationError(f"tracker returned {len(tracks)} tracks for {len(generated)} frames", raw=tracks)
    missing = [k for k, pixel in enumerate(tracks) if pixel is None]
    if missing:
        raise TrackingError(f"{target} not tracked in frames {missing}")

    depth = suite.call(AdapterRole.DEPTH, {
        **base, "frames": generated, "pixels": tracks, "intrinsics": intrinsics,
    })["frames"]
    if len(depth) != len(generated):
        raise SchemaViolationError(f"depth returned {len(depth)} maps for {len(generated)} frames", raw=depth)

    rollout_frames = tuple(
        RolloutFrame(tracks={target: Point2D.from_seq(pixel)}, depth=_parse_depth(entries))
        for pixel, entries in zip(tracks, depth)
    )
    try:
        rollout = FutureRollout(frames=rollout_frames, intrinsics=observation.intrinsics)
    except ValueError as e:
        raise SchemaViolationError(f"rollout violates invariants: {e}", raw={"tracks": tracks}) from e
    logger.debug(f"Imagined {len(rollout)} frames for {target}")
    return rollout


# ---------------------------------------------------------------------
# Trajectory distillation
# ---------------------------------------------------------------------
def extract_trajectory(rollout: FutureRollout, object_id: str, rdp: Optional[RdpParams] = None) -> Trajectory:
    """
    Distill a rollout into camera-frame waypoints.

    The object's pixel track is simplified with RDP; every kept pixel is lifted
    with the depth of its own frame.

    Raises:
        TrackingError: object missing from some frame
        DepthGapError: no depth near a kept pixel
    """
    rdp = rdp or RdpParams()
    track = rollout.track(object_id)
    if track is None:
        raise TrackingError(f"{object_id} is not tracked in every rollout frame")

    pixels = np.array([[p.u, p.v] for p in track], dtype=float)
    kept = rdp_indices(pixels, rdp.epsilon_px)
    waypoints = [
        backproject(track[k], depth_at(rollout.frames[k].depth, track[k], rdp.depth_radius_px), rollout.intrinsics)
        for k in kept
    ]
    logger.debug(f"Trajectory for {object_id}: {len(kept)} waypoints from {len(track)} frames")
    return Trajectory(tuple(waypoints), tuple(kept), object_id)


def predict_trajectory(
    observation: Observation,
    guide: str,
    target: str,
    suite: ModelSuite,
    rdp: Optional[RdpParams] = None,
    frames: int = FIXTURE_ROLLOUT_FRAMES,
) -> Trajectory:
    """Imagine, extract and move the trajectory to the world frame."""
    rollout = imagine_future(observation, guide, target, suite, frames)
    camera_traj = extract_trajectory(rollout, target, rdp)
    world = tuple(observation.extrinsics.to_world(p) for p in camera_traj.waypoints)
    return Trajectory(world, camera_traj.frame_index, target)
