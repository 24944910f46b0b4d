import orjson
import pytest

from services.adapters import AdapterResponse, AdapterRole, BaseModelAdapter, make_fixture_suite
from services.core.models import PlanningMode, Point3D, Predicate, Relation, SubtaskSpec, TaskPlan
from services.errors import GroundingError, InsufficientDataError, PlanCycleError, SchemaViolationError
from services.keyframes.models import KeyframeDescriptor
from services.planning import (
    BaselinePlan,
    BaselineStep,
    PlanningRequest,
    abstract_demonstration,
    plan_to_json,
    replan_subtask,
    scene_summary,
    unify_plan,
    validate_plan,
)

CAPTIONS = [
    KeyframeDescriptor(10, "grasp apple"),
    KeyframeDescriptor(70, "release plate"),
    KeyframeDescriptor(90, "grasp cup"),
    KeyframeDescriptor(120, "release counter"),
]


def baseline(*moves):
    steps = tuple(BaselineStep("move", obj, dest) for obj, dest in moves)
    return BaselinePlan(steps, tuple((i,) for i in range(len(steps))))


class ScriptedPlanner(BaseModelAdapter):
    """Planner that always answers with the same unify body."""
    role = AdapterRole.PLANNER

    def __init__(self, body):
        self.body = body

    def invoke(self, payload):
        return AdapterResponse(payload=self.body, latency=0.0, attempt_count=1)


def scripted_suite(subtasks):
    suite = make_fixture_suite()
    adapters = dict(suite.adapters)
    adapters[AdapterRole.PLANNER] = ScriptedPlanner({"task": "unify", "subtasks": subtasks, "unresolved": []})
    suite.adapters = adapters
    return suite


def subtask(obj, loc, precond=()):
    return {"desc": f"move {obj}", "obj": obj, "loc": loc, "guide": f"move the {obj} to the {loc}",
            "precond": [{"subject": s, "relation": "on", "object": r} for s, r in precond]}


# ---------------------------------------------------------------------
# Scene summary and abstraction
# ---------------------------------------------------------------------
def test_scene_summary_lists_objects_then_regions(table_scene):
    summary = scene_summary(table_scene)
    assert [(e.id, e.kind, e.region) for e in summary] == [
        ("apple_1", "object", "counter_1"),
        ("cup_1", "object", "counter_1"),
        ("counter_1", "region", None),
        ("plate_1", "region", None),
    ]
    assert summary[0].category == "apple"


def test_abstraction_cites_keyframes():
    plan = abstract_demonstration(CAPTIONS, make_fixture_suite())
    assert [(s.object, s.destination) for s in plan.steps] == [("apple", "plate"), ("cup", "counter")]
    assert plan.source_keyframes == ((10, 70), (90, 120))


def test_abstraction_subsamples_long_contexts():
    plan = abstract_demonstration(CAPTIONS, make_fixture_suite(context_budget=2))
    assert [(s.object, s.destination) for s in plan.steps] == [("apple", "counter")]
    assert plan.source_keyframes == ((10, 120),)


def test_abstraction_needs_keyframes():
    with pytest.raises(InsufficientDataError):
        abstract_demonstration([], make_fixture_suite())


# ---------------------------------------------------------------------
# Planning requests
# ---------------------------------------------------------------------
@pytest.mark.parametrize(
    "kwargs",
    [
        {"baseline": baseline(("apple", "plate")), "language": "be quick", "mode": PlanningMode.MIMIC},
        {"baseline": None, "mode": PlanningMode.MIMIC},
        {"baseline": baseline(("apple", "plate")), "language": "x", "mode": PlanningMode.TEXT_ONLY},
        {"baseline": None, "mode": PlanningMode.TEXT_ONLY},
        {"baseline": baseline(("apple", "plate")), "mode": PlanningMode.CONSTRAINED},
    ],
)
def test_planning_request_mode_rules(kwargs):
    with pytest.raises(ValueError):
        PlanningRequest(scene_summary=(), **kwargs)


# ---------------------------------------------------------------------
# Unification per mode
# ---------------------------------------------------------------------
def test_mimic_grounds_categories_to_ids(table_scene):
    request = PlanningRequest(baseline(("apple", "plate")), tuple(scene_summary(table_scene)))
    plan = unify_plan(request, make_fixture_suite())
    assert plan.provenance == PlanningMode.MIMIC
    (only,) = plan.subtasks
    assert (only.obj, only.loc) == ("apple_1", "plate_1")
    assert only.precond == (Predicate("apple_1", Relation.ON, "counter_1"),)
    assert "plate_1" in only.guide
    assert validate_plan(plan, table_scene) == []


def test_constrained_mode_redirects_destinations(table_scene):
    request = PlanningRequest(
        baseline(("apple", "plate")), tuple(scene_summary(table_scene)),
        language="keep it on the counter", mode=PlanningMode.CONSTRAINED,
    )
    plan = unify_plan(request, make_fixture_suite())
    assert [(s.obj, s.loc) for s in plan.subtasks] == [("apple_1", "counter_1")]


def test_skill_transfer_routes_novel_objects(table_scene):
    request = PlanningRequest(
        baseline(("apple", "plate")), tuple(scene_summary(table_scene)), mode=PlanningMode.SKILL_TRANSFER,
    )
    plan = unify_plan(request, make_fixture_suite())
    assert [(s.obj, s.loc) for s in plan.subtasks] == [("apple_1", "plate_1"), ("cup_1", "plate_1")]


def test_text_only_reads_clauses_in_order(table_scene):
    request = PlanningRequest(
        None, tuple(scene_summary(table_scene)),
        language="move the cup to the plate and then the apple onto the plate", mode=PlanningMode.TEXT_ONLY,
    )
    plan = unify_plan(request, make_fixture_suite())
    assert [(s.obj, s.loc) for s in plan.subtasks] == [("cup_1", "plate_1"), ("apple_1", "plate_1")]
    assert plan.provenance == PlanningMode.TEXT_ONLY


def test_repeated_moves_chain_preconditions(table_scene):
    request = PlanningRequest(baseline(("apple", "plate"), ("apple", "counter")), tuple(scene_summary(table_scene)))
    plan = unify_plan(request, make_fixture_suite())
    assert plan.subtasks[1].precond == (Predicate("apple_1", Relation.ON, "plate_1"),)


@pytest.mark.parametrize("moves, missing", [
    ((("banana", "plate"),), ["banana"]),
    ((("apple", "bowl"),), ["bowl"]),
    ((("apple", "unknown"),), ["unknown"]),
])
def test_ungroundable_steps_raise(table_scene, moves, missing):
    request = PlanningRequest(baseline(*moves), tuple(scene_summary(table_scene)))
    with pytest.raises(GroundingError) as info:
        unify_plan(request, make_fixture_suite())
    assert info.value.unresolved == missing
    assert info.value.failure_mode == "plan"


def test_planner_ids_are_checked_against_the_scene(table_scene):
    request = PlanningRequest(baseline(("apple", "plate")), tuple(scene_summary(table_scene)))
    with pytest.raises(GroundingError) as info:
        unify_plan(request, scripted_suite([subtask("pear_1", "plate_1")]))
    assert info.value.unresolved == ["pear_1"]


def test_forward_preconditions_are_a_cycle(table_scene):
    request = PlanningRequest(baseline(("apple", "plate"), ("cup", "plate")), tuple(scene_summary(table_scene)))
    subtasks = [subtask("cup_1", "plate_1", [("apple_1", "plate_1")]), subtask("apple_1", "plate_1")]
    with pytest.raises(PlanCycleError):
        unify_plan(request, scripted_suite(subtasks))


def test_mimic_plan_length_must_match_baseline(table_scene):
    request = PlanningRequest(baseline(("apple", "plate"), ("cup", "plate")), tuple(scene_summary(table_scene)))
    with pytest.raises(SchemaViolationError):
        unify_plan(request, scripted_suite([subtask("apple_1", "plate_1")]))


# ---------------------------------------------------------------------
# Validation, replanning, serialisation
# ---------------------------------------------------------------------
def test_validate_plan_reports_each_unknown_id_once(table_scene):
    plan = TaskPlan((
        SubtaskSpec("a", "pear_1", "bowl_1", "g"),
        SubtaskSpec("b", "pear_1", "plate_1", "g", (Predicate("pear_1", Relation.ON, "bowl_1"),)),
    ), PlanningMode.MIMIC)
    subjects = [d.subject for d in validate_plan(plan, table_scene) if d.invariant == "grounded"]
    assert subjects == ["pear_1", "bowl_1"]


def test_validate_plan_accepts_initial_scene_preconditions(table_scene):
    ok = TaskPlan((SubtaskSpec("a", "cup_1", "plate_1", "g", (Predicate("cup_1", Relation.ON, "counter_1"),)),),
                  PlanningMode.MIMIC)
    assert validate_plan(ok, table_scene) == []


def test_replan_uses_current_scene(table_scene):
    moved = table_scene.with_object(table_scene.get_object("apple_1").moved_to(Point3D(0.58, -0.175, 0.03)))
    failed = SubtaskSpec("move the apple", "apple_1", "counter_1", "move the apple_1 to the counter_1")
    fresh = replan_subtask(failed, moved, make_fixture_suite(), subtask_index=2, attempt=1)
    assert (fresh.obj, fresh.loc) == ("apple_1", "counter_1")
    assert fresh.precond == (Predicate("apple_1", Relation.ON, "plate_1"),)


def test_plan_json_keeps_field_order(table_scene):
    request = PlanningRequest(baseline(("apple", "plate")), tuple(scene_summary(table_scene)))
    plan = unify_plan(request, make_fixture_suite())
    text = plan_to_json(plan)
    assert text.decode().index('"provenance"') < text.decode().index('"subtasks"')
    assert TaskPlan.from_dict(orjson.loads(text)) == plan
