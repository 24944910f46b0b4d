from services.planning.models import BaselinePlan, BaselineStep, PlanningRequest, SceneEntry
from services.planning.translator import (
    abstract_demonstration,
    plan_to_json,
    replan_subtask,
    scene_summary,
    unify_plan,
    validate_plan,
)

__all__ = [
    "BaselinePlan",
    "BaselineStep",
    "PlanningRequest",
    "SceneEntry",
    "abstract_demonstration",
    "plan_to_json",
    "replan_subtask",
    "scene_summary",
    "unify_plan",
    "validate_plan",
]
