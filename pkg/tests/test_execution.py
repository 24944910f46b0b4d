import numpy as np
import pytest

from services.adapters import AdapterRole, FaultInjection, make_fixture_suite
from services.core.models import PlanningMode, Point3D, Predicate, Relation, SceneObject, SceneState, SubtaskSpec, TaskPlan, Trajectory
from services.errors import GraspFailureError, GroundingError, NoGraspError
from services.execution import (
    GraspCandidate,
    GraspOffset,
    KinematicSimulator,
    PipelineConfig,
    SimulatorConfig,
    SubtaskOutcome,
    TrialResult,
    Workcell,
    propose_grasps,
    run_task,
    select_grasp,
    unmet_preconditions,
    verify_subtask,
    verify_with_selector,
)
from services.harness import load_scenario, plan_scenario
from tests.conftest import scenario_path


def grasp_at(obj: SceneObject, lift=0.005, gid=0, stability=0.9) -> GraspCandidate:
    p = obj.position
    return GraspCandidate(gid, Point3D(p.x, p.y, p.z + lift), stability)


def single_object_scene(position, obstacles=()) -> SceneState:
    return SceneState(objects=(SceneObject("block_1", Point3D(*position), 0.02),), obstacles=tuple(obstacles))


def with_budget(config: PipelineConfig, budget: int) -> PipelineConfig:
    return config.model_copy(update={"simulator": config.simulator.model_copy(update={"replan_budget": budget})})


# ---------------------------------------------------------------------
# Simulator
# ---------------------------------------------------------------------
def test_obstacle_free_transfer_lands_on_the_last_waypoint():
    scene = single_object_scene((0.3, 0.0, 0.1))
    traj = Trajectory.from_array([[0.3, 0.0, 0.1], [0.45, 0.1, 0.2], [0.6, 0.2, 0.1]], "block_1")
    sim = KinematicSimulator()
    after, log = sim.execute_trajectory(scene, traj, grasp_at(scene.objects[0]))

    final = after.get_object("block_1")
    np.testing.assert_allclose(final.position.as_array(), [0.6, 0.2, 0.1], atol=1e-12)
    assert not final.disturbed
    assert log.outcome == "released" and log.collisions == []
    assert scene.get_object("block_1").position == Point3D(0.3, 0.0, 0.1)


def test_gripper_keeps_its_grasp_offset_and_step_length():
    scene = single_object_scene((0.3, 0.0, 0.1))
    traj = Trajectory.from_array([[0.3, 0.0, 0.1], [0.4, 0.05, 0.25], [0.6, 0.2, 0.1]], "block_1")
    grasp = GraspCandidate(0, Point3D(0.304, 0.002, 0.108), 0.8)
    sim = KinematicSimulator(SimulatorConfig(step_length=0.01))
    _, log = sim.execute_trajectory(scene, traj, grasp)

    gripper = np.array([s.gripper.to_list() for s in log.steps])
    shift = grasp.pose.as_array() - traj.as_array()[0]
    np.testing.assert_allclose(gripper[0], grasp.pose.as_array(), atol=1e-12)
    np.testing.assert_allclose(gripper[-1], traj.as_array()[-1] + shift, atol=1e-9)
    assert np.linalg.norm(np.diff(gripper, axis=0), axis=1).max() <= 0.01 + 1e-12
    assert all(s.held_object == "block_1" for s in log.steps)
    assert [s.step for s in log.steps] == list(range(len(log.steps)))


def test_passing_close_to_another_object_disturbs_it(table_scene):
    apple = table_scene.get_object("apple_1")
    traj = Trajectory.from_array([[0.35, 0.0, 0.03], [0.55, 0.2, 0.03]], "apple_1")
    after, log = KinematicSimulator().execute_trajectory(table_scene, traj, grasp_at(apple))

    assert after.get_object("cup_1").disturbed
    assert after.get_object("cup_1").position == table_scene.get_object("cup_1").position
    assert not after.get_object("apple_1").disturbed
    assert {c.target for c in log.collisions} == {"cup_1"}
    assert all(c.kind == "object" for c in log.collisions)


def test_grasp_out_of_reach_fails(table_scene):
    apple = table_scene.get_object("apple_1")
    traj = Trajectory.from_array([[0.35, 0.0, 0.03], [0.55, -0.2, 0.03]], "apple_1")
    far = GraspCandidate(0, Point3D(0.45, 0.0, 0.03), 0.9)
    with pytest.raises(GraspFailureError):
        KinematicSimulator().execute_trajectory(table_scene, traj, far)
    with pytest.raises(ValueError):
        KinematicSimulator().execute_trajectory(table_scene, Trajectory.from_array([[0.35, 0, 0.03]], "apple_1"),
                                                grasp_at(apple))


def test_obstacle_knocks_the_object_loose():
    scene = single_object_scene((0.3, 0.0, 0.03), obstacles=[Point3D(0.405, 0.0, 0.035)])
    traj = Trajectory.from_array([[0.3, 0.0, 0.03], [0.5, 0.0, 0.03]], "block_1")
    after, log = KinematicSimulator().execute_trajectory(scene, traj, grasp_at(scene.objects[0]))

    block = after.get_object("block_1")
    assert log.outcome == "dropped"
    assert block.disturbed
    assert block.position.z == 0.03
    assert 0.385 < block.position.x < 0.395
    first_hit = log.collisions[0].step
    assert log.collisions[0].kind == "obstacle"
    assert all(s.held_object is None for s in log.steps[first_hit:])
    assert all(s.held_object == "block_1" for s in log.steps[:first_hit])


def test_simulators_are_counted():
    before = KinematicSimulator.instances_created()
    first, second = KinematicSimulator(), KinematicSimulator()
    assert KinematicSimulator.instances_created() == before + 2
    assert second.instance_id == first.instance_id + 1


# ---------------------------------------------------------------------
# Grasping
# ---------------------------------------------------------------------
def test_proposed_grasps_follow_the_object(table_scene):
    apple = table_scene.get_object("apple_1")
    candidates = propose_grasps(apple)
    assert [c.id for c in candidates] == [0, 1, 2]
    np.testing.assert_allclose(candidates[0].pose.as_array(), [0.35, 0.0, 0.035])
    assert select_grasp(candidates, make_fixture_suite(), "apple_1").id == 0


def test_perturbed_stability_stays_in_range(table_scene):
    apple = table_scene.get_object("apple_1")
    rng = np.random.default_rng(0)
    for _ in range(50):
        assert all(0.0 <= c.stability <= 1.0 for c in propose_grasps(apple, rng, 0.5))


def test_grasp_offsets_move_with_the_object():
    offset = GraspOffset(3, (0.01, 0.0, 0.005), 0.7, 1.2)
    moved = SceneObject("box_1", Point3D(0.5, 0.1, 0.03), 0.02)
    candidate = offset.at(moved)
    np.testing.assert_allclose(candidate.pose.as_array(), [0.51, 0.1, 0.035])
    assert (candidate.id, candidate.yaw) == (3, 1.2)


def test_grasp_selection_needs_candidates():
    with pytest.raises(NoGraspError):
        select_grasp([], make_fixture_suite(), "apple_1")
    with pytest.raises(ValueError):
        GraspCandidate(0, Point3D(0, 0, 0), 1.5)


# ---------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------
def test_verification_reasons(table_scene):
    move = SubtaskSpec("move the apple", "apple_1", "plate_1", "move the apple_1 to the plate_1")
    assert verify_subtask(table_scene, move).reason == "out-of-region"

    placed = table_scene.with_object(table_scene.get_object("apple_1").moved_to(Point3D(0.58, -0.175, 0.03)))
    assert verify_subtask(placed, move).passed
    assert verify_with_selector(placed, move, make_fixture_suite()).passed

    edge = table_scene.with_object(table_scene.get_object("apple_1").moved_to(Point3D(0.505, -0.095, 0.03)))
    assert not verify_subtask(edge, move, tolerance=0.0).passed
    assert verify_subtask(edge, move, tolerance=0.01).passed

    bumped = placed.with_object(SceneObject("apple_1", Point3D(0.58, -0.175, 0.03), 0.02, disturbed=True))
    assert verify_subtask(bumped, move).reason == "disturbed"

    with pytest.raises(GroundingError):
        verify_subtask(table_scene, SubtaskSpec("x", "apple_1", "bowl_1", "g"))


def test_unmet_preconditions(table_scene):
    move = SubtaskSpec("m", "apple_1", "plate_1", "g", (
        Predicate("apple_1", Relation.ON, "counter_1"),
        Predicate("cup_1", Relation.ON, "plate_1"),
        Predicate("cup_1", Relation.HOLDING),
    ))
    assert [str(p) for p in unmet_preconditions(table_scene, move)] == ["on(cup_1, plate_1)", "holding(cup_1)"]


# ---------------------------------------------------------------------
# Outcomes
# ---------------------------------------------------------------------
def test_outcome_reason_rules():
    with pytest.raises(ValueError):
        SubtaskOutcome(0, "a", "b", True, "verify")
    with pytest.raises(ValueError):
        SubtaskOutcome(0, "a", "b", False, "timeout")
    result = TrialResult(0, 1, (SubtaskOutcome(0, "a", "b", True), SubtaskOutcome(1, "a", "c", False, "verify")))
    assert (result.S_i, result.n_i, result.failure_modes) == (0, 1, ["verify"])


# ---------------------------------------------------------------------
# run_task on the meal prep scenario
# ---------------------------------------------------------------------
@pytest.fixture(scope="module")
def meal_prep():
    return load_scenario(scenario_path("meal_prep"))


def run(scenario, faults=(), config=None, seed=11, plan=None):
    config = config or scenario.config
    suite = make_fixture_suite(seed=seed, faults=faults)
    workcell = scenario.workcell(seed)
    plan = plan or plan_scenario(scenario, workcell.scene, suite, config)
    return run_task(workcell, plan, suite, config, scenario.expected_subtasks, trial=0, seed=seed)


def test_full_plan_succeeds(meal_prep):
    result = run(meal_prep)
    assert (result.S_i, result.n_i, result.replans_used) == (1, 5, 0)
    assert [(o.obj, o.loc) for o in result.subtask_outcomes] == [
        ("apple_1", "plate_1"), ("banana_1", "plate_1"), ("orange_1", "plate_1"),
        ("box_1", "basket_1"), ("box_2", "basket_1"),
    ]
    assert all(o.attempts == 1 for o in result.subtask_outcomes)


def test_lost_rollout_is_recovered_by_replanning(meal_prep):
    fault = FaultInjection(AdapterRole.GENERATOR, 3, (0,), "dropout")
    result = run(meal_prep, [fault])
    assert result.S_i == 1
    assert result.replans_used == 1
    assert result.subtask_outcomes[3].attempts == 2


def test_false_negative_without_budget_fails_one_subtask(meal_prep):
    fault = FaultInjection(AdapterRole.SELECTOR, 2, (0,), "dropout")
    result = run(meal_prep, [fault], config=with_budget(meal_prep.config, 0))
    assert (result.S_i, result.n_i) == (0, 4)
    assert result.subtask_outcomes[2].reason == "verify"
    assert result.failure_modes == ["verify"]


def test_budget_exhaustion_reports_the_last_reason(meal_prep):
    fault = FaultInjection(AdapterRole.TRACKER, 1, (0, 1, 2), "dropout")
    result = run(meal_prep, [fault])
    failed = result.subtask_outcomes[1]
    assert (failed.passed, failed.reason, failed.attempts) == (False, "predict", 3)
    assert result.replans_used == 2 and result.n_i == 4


def test_unavailable_adapter_aborts_the_rest(meal_prep):
    fault = FaultInjection(AdapterRole.DEPTH, 1, (0, 1, 2), "timeout")
    result = run(meal_prep, [fault])
    assert result.n_i == 1
    assert [o.reason for o in result.subtask_outcomes[1:]] == ["predict"] * 4
    assert len(result.subtask_outcomes) == 5


def test_stop_on_failure_marks_the_rest_as_plan(meal_prep):
    config = meal_prep.config.model_copy(update={"simulator": meal_prep.config.simulator.model_copy(
        update={"replan_budget": 0, "stop_on_failure": True})})
    fault = FaultInjection(AdapterRole.SELECTOR, 1, (0,), "dropout")
    result = run(meal_prep, [fault], config=config)
    assert [o.reason for o in result.subtask_outcomes] == [None, "verify", "plan", "plan", "plan"]


def test_subtask_with_unmet_precondition_is_skipped(meal_prep):
    plan = TaskPlan((
        SubtaskSpec("move the apple", "apple_1", "plate_1", "move the apple_1 to the plate_1",
                    (Predicate("apple_1", Relation.ON, "basket_1"),)),
        SubtaskSpec("move the box", "box_1", "basket_1", "move the box_1 to the basket_1"),
    ), PlanningMode.MIMIC)
    result = run(meal_prep, plan=plan)
    skipped, moved = result.subtask_outcomes[:2]
    assert (skipped.passed, skipped.reason, skipped.attempts) == (False, "plan", 0)
    assert moved.passed
    assert [o.reason for o in result.subtask_outcomes[2:]] == ["plan"] * 3


def test_same_seed_same_result(meal_prep):
    assert run(meal_prep, seed=5).to_dict() == run(meal_prep, seed=5).to_dict()


def test_workcell_jitter_is_seeded(meal_prep):
    assert meal_prep.workcell(3).scene == meal_prep.workcell(3).scene
    assert meal_prep.workcell(3).scene != meal_prep.workcell(4).scene
    for a, b in zip(meal_prep.scene.objects, meal_prep.workcell(3).scene.objects):
        assert abs(a.position.x - b.position.x) <= 0.005 and a.position.z == b.position.z
    assert isinstance(meal_prep.workcell(0), Workcell)
