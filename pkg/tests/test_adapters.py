import httpx
import orjson
import pytest
from pydantic import ValidationError

from services.adapters import (
    AdapterConfig,
    AdapterKind,
    AdapterRole,
    FaultInjection,
    FixtureNoise,
    RemoteModelAdapter,
    build_adapter,
    build_suite,
    call_adapter,
    make_fixture_suite,
)
from services.adapters import client
from services.adapters.fixtures import FixtureTracker, group_of, normalize_phrase, rng_for
from services.adapters.schemas import (
    json_schemas,
    model_schemas,
    validate_plan_document,
    validate_request,
    validate_response,
)
from services.core.models import Point3D
from services.errors import AdapterUnavailableError, RemoteError, SchemaViolationError

SELECT = {"task": "select_grasp", "object_id": "apple_1", "candidates": [
    {"id": 0, "pose": [0.35, 0.0, 0.035], "stability": 0.7},
    {"id": 1, "pose": [0.35, 0.01, 0.035], "stability": 0.9},
    {"id": 2, "pose": [0.35, -0.01, 0.035], "stability": 0.9},
]}


def camera_body(intrinsics, extrinsics):
    return {"intrinsics": intrinsics.to_dict(), "extrinsics": extrinsics.to_dict()}


def generator_request(table_scene, intrinsics, extrinsics, **extra):
    return {
        "guide": "move the apple_1 to the plate_1",
        "target": "apple_1",
        "scene": table_scene.to_dict(),
        "camera": camera_body(intrinsics, extrinsics),
        "frames": 8,
        **extra,
    }


# ---------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------
def test_every_role_publishes_request_and_response_schemas():
    schemas = json_schemas()
    assert set(schemas) == {f"{r.value}.{d}" for r in AdapterRole for d in ("request", "response")}
    assert "PlanDocumentSchema" in model_schemas()


def test_requests_are_strict():
    assert validate_request(AdapterRole.SELECTOR, SELECT)["attempt"] == 0
    with pytest.raises(SchemaViolationError, match="candidates"):
        validate_request(AdapterRole.SELECTOR, {**SELECT, "candidates": []})
    with pytest.raises(SchemaViolationError):
        validate_request(AdapterRole.SELECTOR, {**SELECT, "temperature": 0.2})
    with pytest.raises(SchemaViolationError):
        validate_request(AdapterRole.PLANNER, {"task": "summarise", "keyframes": []})


def test_response_violation_keeps_raw_body():
    body = {"task": "verify", "passed": "maybe"}
    with pytest.raises(SchemaViolationError) as info:
        validate_response(AdapterRole.SELECTOR, body)
    assert info.value.raw == body
    assert info.value.failure_mode == "predict"


def test_plan_document_validation():
    doc = {"provenance": "mimic", "subtasks": [
        {"desc": "move", "obj": "apple_1", "loc": "plate_1", "guide": "move the apple_1 to the plate_1",
         "precond": [{"subject": "apple_1", "relation": "on", "object": "counter_1"}]},
    ]}
    assert validate_plan_document(doc)["subtasks"][0]["loc"] == "plate_1"
    with pytest.raises(SchemaViolationError):
        validate_plan_document({**doc, "provenance": "freestyle"})
    with pytest.raises(SchemaViolationError):
        validate_plan_document({**doc, "subtasks": []})


def test_remote_config_needs_endpoint():
    with pytest.raises(ValidationError):
        AdapterConfig(kind=AdapterKind.REMOTE)
    with pytest.raises(ValidationError):
        AdapterConfig(retries=9)


# ---------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------
def test_phrase_normalisation():
    assert normalize_phrase("the Red_Cubes") == "red cube"
    assert normalize_phrase("into the boxes") == "box"
    assert group_of("banana") == group_of("apple") == "fruit"
    assert group_of("teapot") == "teapot"


def test_rng_ignores_key_order():
    a = rng_for(3, AdapterRole.TRACKER, {"x": 1, "y": 2}).random()
    b = rng_for(3, AdapterRole.TRACKER, {"y": 2, "x": 1}).random()
    c = rng_for(3, AdapterRole.DEPTH, {"x": 1, "y": 2}).random()
    assert a == b != c


def test_fixtures_are_pure_functions_of_request_and_seed(table_scene, intrinsics, extrinsics):
    request = generator_request(table_scene, intrinsics, extrinsics)
    first = call_adapter(AdapterRole.GENERATOR, request, AdapterConfig(seed=5)).payload
    again = call_adapter(AdapterRole.GENERATOR, request, AdapterConfig(seed=5)).payload
    assert orjson.dumps(first) == orjson.dumps(again)

    frames = first["frames"]
    noisy = {"object_id": "apple_1", "frames": frames, "intrinsics": intrinsics.to_dict()}

    def track(seed):
        adapter = FixtureTracker(seed=seed, noise=FixtureNoise(track_jitter_px=1.5))
        return call_adapter(AdapterRole.TRACKER, noisy, adapter=adapter).payload["tracks"]

    assert track(1) == track(1)
    assert track(1) != track(2)
    assert track(1)[0] == track(2)[0]
    assert track(1)[-1] == track(2)[-1]


def test_generator_keeps_other_objects_still(table_scene, intrinsics, extrinsics):
    body = call_adapter(AdapterRole.GENERATOR, generator_request(table_scene, intrinsics, extrinsics)).payload
    cups = [f["objects"]["cup_1"] for f in body["frames"]]
    assert all(c == cups[0] for c in cups)
    assert len(body["frames"]) == 8


def test_selector_picks_most_stable_lowest_id():
    body = call_adapter(AdapterRole.SELECTOR, SELECT).payload
    assert body == {"task": "select_grasp", "selected_id": 1}


def test_planner_pairs_grasp_and_release_captions():
    keyframes = [
        {"frame_index": 10, "label": "grasp apple"},
        {"frame_index": 40, "label": "moving"},
        {"frame_index": 70, "label": "release the plate"},
        {"frame_index": 90, "label": "grasp cups"},
        {"frame_index": 120, "label": "release counter"},
    ]
    body = call_adapter(AdapterRole.PLANNER, {"task": "abstract", "keyframes": keyframes}).payload
    assert [(s["object"], s["destination"], s["keyframes"]) for s in body["steps"]] == [
        ("apple", "plate", [10, 70]),
        ("cup", "counter", [90, 120]),
    ]


def test_planner_flags_unpaired_grasps():
    single = [{"frame_index": 12, "label": "grasp apple"}]
    body = call_adapter(AdapterRole.PLANNER, {"task": "abstract", "keyframes": single}).payload
    assert body["steps"] == [{"action": "move", "object": "apple", "destination": "unknown", "keyframes": [12]}]

    pairs = []
    for i, (obj, dest) in enumerate([("apple", "plate"), ("cup", "sink"), ("box", "shelf"), ("pen", "tray")]):
        pairs += [{"frame_index": 40 * i, "label": f"grasp {obj}"},
                  {"frame_index": 40 * i + 20, "label": f"release {dest}"}]
    body = call_adapter(AdapterRole.PLANNER, {"task": "abstract", "keyframes": pairs}).payload
    assert len(body["steps"]) == 4
    assert [s["destination"] for s in body["steps"]] == ["plate", "sink", "shelf", "tray"]


# ---------------------------------------------------------------------
# Fault injection
# ---------------------------------------------------------------------
def test_unknown_fault_kind_rejected():
    with pytest.raises(ValueError):
        FaultInjection(AdapterRole.DEPTH, 0, kind="flaky")


def test_faults_match_subtask_and_attempt():
    faults = [
        FaultInjection(AdapterRole.SELECTOR, 2, (0,), "timeout"),
        FaultInjection(AdapterRole.SELECTOR, 3, (0, 1), "schema"),
    ]
    suite = make_fixture_suite(faults=faults)
    with pytest.raises(AdapterUnavailableError):
        suite.call(AdapterRole.SELECTOR, {**SELECT, "subtask_index": 2})
    assert suite.call(AdapterRole.SELECTOR, {**SELECT, "subtask_index": 2, "attempt": 1})["selected_id"] == 1
    with pytest.raises(SchemaViolationError):
        suite.call(AdapterRole.SELECTOR, {**SELECT, "subtask_index": 3, "attempt": 1})
    assert suite.call(AdapterRole.SELECTOR, {**SELECT, "subtask_index": 1})["selected_id"] == 1


def test_verifier_dropout_is_a_false_negative(table_scene):
    placed = table_scene.with_object(table_scene.get_object("apple_1").moved_to(Point3D(0.58, -0.175, 0.03)))
    request = {
        "task": "verify",
        "subtask": {"desc": "move", "obj": "apple_1", "loc": "plate_1", "guide": "move the apple_1 to the plate_1"},
        "scene": placed.to_dict(),
        "tolerance": 0.0,
        "subtask_index": 0,
    }
    assert make_fixture_suite().call(AdapterRole.SELECTOR, request)["passed"] is True
    faulty = make_fixture_suite(faults=[FaultInjection(AdapterRole.SELECTOR, 0)])
    verdict = faulty.call(AdapterRole.SELECTOR, request)
    assert verdict == {"task": "verify", "passed": False, "reason": "out-of-region"}


# ---------------------------------------------------------------------
# Remote adapter
# ---------------------------------------------------------------------
def remote(handler, retries=3, token=""):
    config = AdapterConfig(kind=AdapterKind.REMOTE, endpoint="http://models.local/selector",
                           retries=retries, timeout=1.0, api_token=token)
    return build_adapter(AdapterRole.SELECTOR, config, transport=httpx.MockTransport(handler))


def test_remote_retries_unavailable_answers():
    statuses = iter([503, 503, 200])
    seen = []

    def handler(request):
        seen.append(orjson.loads(request.content))
        status = next(statuses)
        if status != 200:
            return httpx.Response(status, text="busy")
        return httpx.Response(200, json={"task": "select_grasp", "selected_id": 2})

    adapter = remote(handler)
    assert isinstance(adapter, RemoteModelAdapter)
    response = call_adapter(AdapterRole.SELECTOR, SELECT, adapter=adapter)
    assert response.attempt_count == 3
    assert response.payload["selected_id"] == 2
    assert len(seen) == 3 and seen[0]["object_id"] == "apple_1"


def test_remote_gives_up_after_budget():
    calls = []

    def handler(request):
        calls.append(1)
        raise httpx.ReadTimeout("slow", request=request)

    with pytest.raises(AdapterUnavailableError):
        call_adapter(AdapterRole.SELECTOR, SELECT, adapter=remote(handler, retries=2))
    assert len(calls) == 3


def test_remote_client_errors_are_not_retried():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(400, text="bad request")

    with pytest.raises(RemoteError) as info:
        call_adapter(AdapterRole.SELECTOR, SELECT, adapter=remote(handler))
    assert info.value.status == 400 and len(calls) == 1


def test_remote_exhausted_5xx_is_a_remote_error():
    with pytest.raises(RemoteError) as info:
        call_adapter(AdapterRole.SELECTOR, SELECT,
                     adapter=remote(lambda request: httpx.Response(502), retries=1))
    assert info.value.status == 502


def test_remote_body_must_be_an_object():
    with pytest.raises(SchemaViolationError):
        call_adapter(AdapterRole.SELECTOR, SELECT, adapter=remote(lambda request: httpx.Response(200, json=[1, 2])))
    with pytest.raises(SchemaViolationError):
        call_adapter(AdapterRole.SELECTOR, SELECT,
                     adapter=remote(lambda request: httpx.Response(200, json={"task": "select_grasp"})))


def test_remote_sends_bearer_token():
    headers = {}

    def handler(request):
        headers["authorization"] = request.headers.get("authorization")
        return httpx.Response(200, json={"task": "select_grasp", "selected_id": 0})

    call_adapter(AdapterRole.SELECTOR, SELECT, adapter=remote(handler, token="s3cret"))
    assert headers["authorization"] == "Bearer s3cret"


# ---------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------
def test_suite_falls_back_to_environment_endpoints(monkeypatch):
    monkeypatch.setitem(client.ENV_ENDPOINTS, AdapterRole.TRACKER, "http://models.local/tracker")
    suite = build_suite(seed=4)
    assert isinstance(suite.adapters[AdapterRole.TRACKER], RemoteModelAdapter)
    assert not isinstance(suite.adapters[AdapterRole.DEPTH], RemoteModelAdapter)
    assert suite.adapters[AdapterRole.DEPTH].seed == 4
    suite.close()

    fixtures_only = make_fixture_suite(seed=4)
    assert not any(isinstance(a, RemoteModelAdapter) for a in fixtures_only.adapters.values())


def test_explicit_fixture_config_takes_the_suite_seed():
    suite = build_suite({AdapterRole.PLANNER: AdapterConfig(seed=99)}, seed=7, use_env=False)
    assert suite.adapters[AdapterRole.PLANNER].seed == 7
