import logging
import math
from collections import Counter
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import FIXTURE_SLOT_SPACING
from services.core.models import Diagnostic, Point3D, SceneState, Trajectory
from services.errors import DegenerateVectorError

logger = logging.getLogger(__name__)

VectorLike = Union[Sequence[float], np.ndarray, Point3D]

# Degenerate segment length (m)
SEGMENT_EPS = 1e-9

# Slot order inside a destination region: centre first, then the 3x3 ring
_SLOT_OFFSETS = [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)]


def _vec(value: VectorLike) -> np.ndarray:
    if isinstance(value, Point3D):
        return value.as_array()
    return np.asarray(value, dtype=float)


# ---------------------------------------------------------------------
# Angles
# ---------------------------------------------------------------------
def angle_between(a: VectorLike, b: VectorLike) -> float:
    """
    Angle between two 3D vectors.

    Args:
        a: First vector
        b: Second vector

    Returns:
        Angle in radians, in [0, pi]

    Raises:
        DegenerateVectorError: if either vector has zero norm
    """
    va, vb = _vec(a), _vec(b)
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise DegenerateVectorError("angle_between needs two non-zero vectors")
    cos = float(np.dot(va, vb) / (na * nb))
    return math.acos(min(1.0, max(-1.0, cos)))


def turning_angles(traj: Trajectory) -> List[float]:
    """Turning angle at every interior waypoint; degenerate segments are skipped."""
    points = traj.as_array()
    angles = []
    for m in range(1, len(points) - 1):
        u = points[m] - points[m - 1]
        v = points[m + 1] - points[m]
        if np.linalg.norm(u) < SEGMENT_EPS or np.linalg.norm(v) < SEGMENT_EPS:
            continue
        angles.append(angle_between(u, v))
    return angles


# ---------------------------------------------------------------------
# Scene validation
# ---------------------------------------------------------------------
def validate_scene(scene: SceneState) -> List[Diagnostic]:
    """
    Check SceneState invariants.

    Args:
        scene: Scene to check

    Returns:
        One diagnostic per violation; empty when the scene is well formed
    """
    diagnostics: List[Diagnostic] = []

    object_counts = Counter(scene.object_ids)
    region_counts = Counter(scene.region_ids)
    for oid, count in object_counts.items():
        if count > 1:
            diagnostics.append(Diagnostic("unique-id", oid, f"object id declared {count} times"))
    for rid, count in region_counts.items():
        if count > 1:
            diagnostics.append(Diagnostic("unique-id", rid, f"region id declared {count} times"))
    for shared in sorted(set(object_counts) & set(region_counts)):
        diagnostics.append(Diagnostic("unique-id", shared, "id used by both an object and a region"))

    for obj in scene.objects:
        if not obj.position.is_finite() or (obj.yaw is not None and not math.isfinite(obj.yaw)):
            diagnostics.append(Diagnostic("finite-values", obj.id, "pose has non-finite values"))
        if not (math.isfinite(obj.radius) and obj.radius > 0):
            diagnostics.append(Diagnostic("positive-radius", obj.id, f"radius {obj.radius} must be > 0"))

    for region in scene.regions:
        if not (region.min.is_finite() and region.max.is_finite()):
            diagnostics.append(Diagnostic("finite-values", region.id, "box has non-finite corners"))
            continue
        for axis in ("x", "y", "z"):
            lo, hi = getattr(region.min, axis), getattr(region.max, axis)
            if lo > hi:
                diagnostics.append(Diagnostic("region-bounds", region.id, f"min.{axis}={lo} > max.{axis}={hi}"))

    for i, point in enumerate(scene.obstacles):
        if not point.is_finite():
            diagnostics.append(Diagnostic("finite-values", f"obstacle[{i}]", "non-finite obstacle point"))

    if scene.held_object is not None and scene.held_object not in object_counts:
        diagnostics.append(Diagnostic("held-object", scene.held_object, "held object is not declared"))

    if diagnostics:
        logger.debug(f"Scene validation found {len(diagnostics)} problem(s)")
    return diagnostics


# ---------------------------------------------------------------------
# Placement
# ---------------------------------------------------------------------
def region_of(scene: SceneState, object_id: str, tolerance: float = 0.0) -> Optional[str]:
    """Id of the region containing the object's centre (lexicographically first), or None."""
    obj = scene.get_object(object_id)
    if obj is None:
        return None
    for region in sorted(scene.regions, key=lambda r: r.id):
        if region.contains(obj.position, tolerance):
            return region.id
    return None


def placement_slot(
    scene: SceneState,
    object_id: str,
    region_id: str,
    spacing: float = FIXTURE_SLOT_SPACING,
) -> Point3D:
    """
    Free placement point for an object inside a destination region.

    Slots form a 3x3 grid around the region centre (centre tried first). A slot
    is free when every other object lies at least ``spacing`` away in xy. The
    object keeps its current height.

    Args:
        scene: Current scene
        object_id: Object to place
        region_id: Destination region
        spacing: Grid spacing and minimum xy separation (m)

    Returns:
        Placement point in world frame
    """
    obj = scene.get_object(object_id)
    region = scene.get_region(region_id)
    if obj is None or region is None:
        raise KeyError(f"unknown object or region: {object_id}, {region_id}")

    center = region.center
    others = np.array(
        [[o.position.x, o.position.y] for o in scene.objects if o.id != object_id],
        dtype=float,
    ).reshape(-1, 2)

    for dx, dy in _SLOT_OFFSETS:
        slot = np.array([center.x + dx * spacing, center.y + dy * spacing])
        if not (region.min.x <= slot[0] <= region.max.x and region.min.y <= slot[1] <= region.max.y):
            continue
        if len(others) and np.min(np.linalg.norm(others - slot, axis=1)) < spacing - 1e-9:
            continue
        return Point3D(float(slot[0]), float(slot[1]), obj.position.z)

    logger.warning(f"No free slot in {region_id} for {object_id}; using region centre")
    return Point3D(center.x, center.y, obj.position.z)


def placement_verdict(
    scene: SceneState,
    object_id: str,
    region_id: str,
    tolerance: float = 0.0,
) -> Tuple[bool, Optional[str]]:
    """
    Geometric check that an object rests undisturbed in a region.

    Returns:
        (passed, reason); reason is one of "ungrounded", "out-of-region",
        "disturbed", or None when passed
    """
    obj = scene.get_object(object_id)
    region = scene.get_region(region_id)
    if obj is None or region is None:
        return False, "ungrounded"
    if not region.contains(obj.position, tolerance):
        return False, "out-of-region"
    if obj.disturbed:
        return False, "disturbed"
    return True, None
