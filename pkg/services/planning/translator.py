"""
Demonstration-to-plan translation through the planner adapter.
"""
import logging
from typing import Dict, List, Mapping, Optional, Sequence

import networkx as nx

from services.adapters import AdapterRole, ModelSuite
from services.core.geometry import region_of
from services.core.models import Diagnostic, PlanningMode, Relation, SceneState, SubtaskSpec, TaskPlan
from services.errors import GroundingError, InsufficientDataError, PlanCycleError, SchemaViolationError
from services.keyframes.models import KeyframeDescriptor
from services.planning.models import BaselinePlan, PlanningRequest, SceneEntry
from utils import dump_json

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------
# Scene summary
# ---------------------------------------------------------------------
def scene_summary(scene: SceneState) -> List[SceneEntry]:
    """Objects (with their current region) followed by regions, in declaration order."""
    entries = [SceneEntry(o.id, o.semantic_category, region_of(scene, o.id), "object") for o in scene.objects]
    entries += [SceneEntry(r.id, r.semantic_category, None, "region") for r in scene.regions]
    return entries


# ---------------------------------------------------------------------
# Abstraction
# ---------------------------------------------------------------------
def abstract_demonstration(keyframes: Sequence[KeyframeDescriptor], suite: ModelSuite) -> BaselinePlan:
    """
    Ask the planner for a baseline plan of the demonstrated actions.

    Args:
        keyframes: Captioned keyframes, chronological
        suite: Model adapters (planner role used)

    Returns:
        BaselinePlan whose steps each cite their keyframes
    """
    if not keyframes:
        raise InsufficientDataError("abstraction needs at least one keyframe")
    body = suite.call(AdapterRole.PLANNER, {
        "task": "abstract",
        "keyframes": [k.to_dict() for k in keyframes],
    })
    try:
        plan = BaselinePlan.from_dict(body)
    except (KeyError, ValueError) as e:
        raise SchemaViolationError(f"planner baseline rejected: {e}", raw=body) from e
    logger.info(f"Baseline plan: {len(plan)} step(s) from {len(keyframes)} keyframe(s)")
    return plan


# ---------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------
def _precondition_diagnostics(plan: TaskPlan, initial_regions: Mapping[str, Optional[str]]) -> List[Diagnostic]:
    """
    Ordering check of ``on`` preconditions.

    A precondition on(o, r) of subtask n is produced by the latest earlier
    subtask moving o (which must move it to r); when no earlier subtask moves o
    the initial scene may satisfy it. If instead a later subtask produces it,
    the dependency graph (plan order plus producer -> consumer edges) has a
    cycle.
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(range(len(plan)))
    graph.add_edges_from((n, n + 1) for n in range(len(plan) - 1))
    forward = []
    for n, subtask in enumerate(plan.subtasks):
        for pred in subtask.precond:
            if pred.relation != Relation.ON:
                continue
            earlier = [j for j in range(n) if plan.subtasks[j].obj == pred.subject]
            if earlier:
                if plan.subtasks[earlier[-1]].loc == pred.object:
                    graph.add_edge(earlier[-1], n)
                    continue
            elif initial_regions.get(pred.subject) == pred.object:
                continue
            later = [j for j in range(n + 1, len(plan))
                     if plan.subtasks[j].obj == pred.subject and plan.subtasks[j].loc == pred.object]
            if later:
                graph.add_edge(later[0], n)
                forward.append((n, pred, later[0]))

    if nx.is_directed_acyclic_graph(graph):
        return []
    return [
        Diagnostic("precondition-order", f"subtask {n}", f"{pred} is produced by later subtask {j}")
        for n, pred, j in forward
    ]


def _grounding_diagnostics(plan: TaskPlan, object_ids: Sequence[str], region_ids: Sequence[str]) -> List[Diagnostic]:
    objects, regions = set(object_ids), set(region_ids)
    diagnostics: List[Diagnostic] = []
    reported = set()

    def report(identifier: str, message: str):
        if identifier not in reported:
            reported.add(identifier)
            diagnostics.append(Diagnostic("grounded", identifier, message))

    for n, subtask in enumerate(plan.subtasks):
        if subtask.obj not in objects:
            report(subtask.obj, f"subtask {n} object is not in the scene")
        if subtask.loc not in regions:
            report(subtask.loc, f"subtask {n} destination is not a scene region")
        for pred in subtask.precond:
            if pred.subject not in objects:
                report(pred.subject, f"subtask {n} precondition {pred} names an unknown object")
            if pred.relation == Relation.ON and pred.object not in regions:
                report(pred.object, f"subtask {n} precondition {pred} names an unknown region")
    return diagnostics


def validate_plan(plan: TaskPlan, scene: SceneState) -> List[Diagnostic]:
    """
    Check grounding and precondition order of a plan against a scene.

    Returns:
        Diagnostics; empty when every id exists and preconditions are ordered
    """
    diagnostics = _grounding_diagnostics(plan, scene.object_ids, scene.region_ids)
    initial = {oid: region_of(scene, oid) for oid in scene.object_ids}
    diagnostics += _precondition_diagnostics(plan, initial)
    return diagnostics


# ---------------------------------------------------------------------
# Unification
# ---------------------------------------------------------------------
def _plan_from_body(body: Dict, provenance: PlanningMode) -> TaskPlan:
    if body.get("unresolved"):
        raise GroundingError(f"planner could not ground {', '.join(body['unresolved'])}", body["unresolved"])
    if not body.get("subtasks"):
        raise GroundingError("planner returned no subtasks")
    try:
        subtasks = tuple(SubtaskSpec.from_dict(s) for s in body["subtasks"])
    except (KeyError, ValueError) as e:
        raise SchemaViolationError(f"planner subtask rejected: {e}", raw=body) from e
    return TaskPlan(subtasks=subtasks, provenance=provenance)


def unify_plan(request: PlanningRequest, suite: ModelSuite) -> TaskPlan:
    """
    Produce the executable plan for a planning request.

    Args:
        request: Baseline, scene summary, language and mode
        suite: Model adapters (planner role used)

    Returns:
        TaskPlan grounded in the scene summary, provenance = request.mode

    Raises:
        GroundingError: ids that do not resolve against the scene summary
        PlanCycleError: preconditions refer to later subtasks
    """
    body = suite.call(AdapterRole.PLANNER, request.to_payload())
    plan = _plan_from_body(body, request.mode)

    diagnostics = _grounding_diagnostics(plan, request.object_ids, request.region_ids)
    if diagnostics:
        raise GroundingError(
            f"plan references unknown ids: {', '.join(d.subject for d in diagnostics)}",
            [d.subject for d in diagnostics],
        )
    initial = {e.id: e.region for e in request.scene_summary if e.kind == "object"}
    ordering = _precondition_diagnostics(plan, initial)
    if ordering:
        raise PlanCycleError("; ".join(str(d) for d in ordering))

    if request.mode == PlanningMode.MIMIC and len(plan) != len(request.baseline):
        raise SchemaViolationError(
            f"mimic plan has {len(plan)} subtasks for {len(request.baseline)} baseline steps", raw=body
        )
    logger.info(f"Unified plan ({request.mode.value}): {len(plan)} subtask(s)")
    return plan


def replan_subtask(
    failed: SubtaskSpec,
    scene: SceneState,
    suite: ModelSuite,
    mode: PlanningMode = PlanningMode.MIMIC,
    subtask_index: int = 0,
    attempt: int = 1,
) -> SubtaskSpec:
    """
    Re-plan one failed subtask from the current scene.

    The planner is asked for the same object and destination ids, so the
    returned subtask carries preconditions and prompts derived from the new
    observation.
    """
    summary = scene_summary(scene)
    body = suite.call(AdapterRole.PLANNER, {
        "task": "unify",
        "mode": mode.value,
        "baseline": None,
        "scene": [e.to_dict() for e in summary],
        "language": None,
        "focus": {"obj": failed.obj, "loc": failed.loc},
        "subtask_index": subtask_index,
        "attempt": attempt,
    })
    plan = _plan_from_body(body, mode)
    diagnostics = _grounding_diagnostics(plan, scene.object_ids, scene.region_ids)
    if diagnostics:
        raise GroundingError("replanned subtask is not grounded", [d.subject for d in diagnostics])
    logger.warning(f"Replanned subtask {subtask_index} (attempt {attempt}): {plan.subtasks[0].desc}")
    return plan.subtasks[0]


def plan_to_json(plan: TaskPlan) -> bytes:
    """Serialized plan with a fixed field order."""
    return dump_json(plan.to_dict(), sort_keys=False)
