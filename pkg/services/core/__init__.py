from services.core.models import (
    CameraExtrinsics,
    CameraIntrinsics,
    Diagnostic,
    PlanningMode,
    Point2D,
    Point3D,
    Predicate,
    Region,
    Relation,
    SceneObject,
    SceneState,
    SubtaskSpec,
    TaskPlan,
    Trajectory,
    default_category,
)
from services.core.geometry import (
    angle_between,
    placement_slot,
    placement_verdict,
    region_of,
    turning_angles,
    validate_scene,
)

__all__ = [
    "CameraExtrinsics",
    "CameraIntrinsics",
    "Diagnostic",
    "PlanningMode",
    "Point2D",
    "Point3D",
    "Predicate",
    "Region",
    "Relation",
    "SceneObject",
    "SceneState",
    "SubtaskSpec",
    "TaskPlan",
    "Trajectory",
    "default_category",
    "angle_between",
    "placement_slot",
    "placement_verdict",
    "region_of",
    "turning_angles",
    "validate_scene",
]
