"""
Wire schemas for every model role.

All bodies are strict JSON objects (unknown keys rejected). Requests carry
``subtask_index`` and ``attempt`` so that scripted faults stay a function of
the request.
"""
from typing import Annotated, Any, Dict, List, Literal, Optional, Type, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from services.adapters.base import AdapterRole
from services.core.models import PlanningMode
from services.errors import SchemaViolationError

Vec2 = List[float]
Vec3 = List[float]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class _Request(_Strict):
    subtask_index: int = Field(0, ge=0)
    attempt: int = Field(0, ge=0)


# ---------------------------------------------------------------------
# Shared pieces
# ---------------------------------------------------------------------
class IntrinsicsSchema(_Strict):
    fx: float = Field(gt=0)
    fy: float = Field(gt=0)
    cx: float
    cy: float
    width: int = Field(gt=0)
    height: int = Field(gt=0)


class ExtrinsicsSchema(_Strict):
    rotation: List[Vec3] = Field(min_length=3, max_length=3)
    translation: Vec3 = Field(min_length=3, max_length=3)


class CameraSchema(_Strict):
    intrinsics: IntrinsicsSchema
    extrinsics: ExtrinsicsSchema


class PredicateSchema(_Strict):
    subject: str = Field(min_length=1)
    relation: Literal["on", "holding"]
    object: Optional[str] = None


class SubtaskSchema(_Strict):
    desc: str = Field(min_length=1)
    obj: str = Field(min_length=1)
    loc: str = Field(min_length=1)
    guide: str = Field(min_length=1)
    precond: List[PredicateSchema] = []


class SceneEntrySchema(_Strict):
    id: str = Field(min_length=1)
    category: str
    region: Optional[str] = None
    kind: Literal["object", "region"] = "object"


class KeyframeSchema(_Strict):
    frame_index: int = Field(ge=0)
    label: str
    wrist: Optional[Vec2] = None


class BaselineStepSchema(_Strict):
    action: str = Field(min_length=1)
    object: str = Field(min_length=1)
    destination: str = Field(min_length=1)
    keyframes: List[int] = Field(min_length=1)


class BaselineSchema(_Strict):
    steps: List[BaselineStepSchema] = Field(min_length=1)


# ---------------------------------------------------------------------
# Planner
# ---------------------------------------------------------------------
class PlannerAbstractRequest(_Request):
    task: Literal["abstract"] = "abstract"
    keyframes: List[KeyframeSchema] = Field(min_length=1)


class PlannerUnifyRequest(_Request):
    task: Literal["unify"] = "unify"
    mode: PlanningMode
    baseline: Optional[BaselineSchema] = None
    scene: List[SceneEntrySchema]
    language: Optional[str] = None
    focus: Optional[Dict[str, str]] = None


class PlannerAbstractResponse(_Strict):
    task: Literal["abstract"] = "abstract"
    steps: List[BaselineStepSchema] = Field(min_length=1)


class PlannerUnifyResponse(_Strict):
    task: Literal["unify"] = "unify"
    subtasks: List[SubtaskSchema]
    unresolved: List[str] = []


class PlanDocumentSchema(_Strict):
    """Serialised TaskPlan."""
    provenance: PlanningMode
    subtasks: List[SubtaskSchema] = Field(min_length=1)


# ---------------------------------------------------------------------
# Generator / tracker / depth
# ---------------------------------------------------------------------
class GeneratorRequest(_Request):
    guide: str = Field(min_length=1)
    target: str = Field(min_length=1)
    scene: Dict[str, Any]
    camera: CameraSchema
    frames: int = Field(ge=2)


class GeneratedFrameSchema(_Strict):
    """Rendered frame: camera-frame centroid of every visible object."""
    objects: Dict[str, Vec3]


class GeneratorResponse(_Strict):
    frames: List[GeneratedFrameSchema] = Field(min_length=2)


class TrackerRequest(_Request):
    object_id: str = Field(min_length=1)
    frames: List[GeneratedFrameSchema] = Field(min_length=1)
    intrinsics: IntrinsicsSchema


class TrackerResponse(_Strict):
    tracks: List[Optional[Vec2]]


class DepthRequest(_Request):
    frames: List[GeneratedFrameSchema] = Field(min_length=1)
    pixels: List[Vec2]
    intrinsics: IntrinsicsSchema


class DepthResponse(_Strict):
    """Per frame: sparse map from "u,v" to metres."""
    frames: List[Dict[str, float]]


# ---------------------------------------------------------------------
# Selector / verifier
# ---------------------------------------------------------------------
class GraspSchema(_Strict):
    id: int = Field(ge=0)
    pose: Vec3 = Field(min_length=3, max_length=3)
    yaw: float = 0.0
    stability: float = Field(ge=0, le=1)


class SelectGraspRequest(_Request):
    task: Literal["select_grasp"] = "select_grasp"
    object_id: str
    candidates: List[GraspSchema] = Field(min_length=1)


class VerifyRequest(_Request):
    task: Literal["verify"] = "verify"
    subtask: SubtaskSchema
    scene: Dict[str, Any]
    tolerance: float = Field(ge=0)


class SelectGraspResponse(_Strict):
    task: Literal["select_grasp"] = "select_grasp"
    selected_id: int


class VerifyResponse(_Strict):
    task: Literal["verify"] = "verify"
    passed: bool
    reason: Optional[str] = None


# ---------------------------------------------------------------------
# Role registry
# ---------------------------------------------------------------------
_PLANNER_REQUEST = Union[PlannerAbstractRequest, PlannerUnifyRequest]
_PLANNER_RESPONSE = Union[PlannerAbstractResponse, PlannerUnifyResponse]
_SELECTOR_REQUEST = Union[SelectGraspRequest, VerifyRequest]
_SELECTOR_RESPONSE = Union[SelectGraspResponse, VerifyResponse]

REQUEST_SCHEMAS: Dict[AdapterRole, Any] = {
    AdapterRole.PLANNER: _PLANNER_REQUEST,
    AdapterRole.GENERATOR: GeneratorRequest,
    AdapterRole.TRACKER: TrackerRequest,
    AdapterRole.DEPTH: DepthRequest,
    AdapterRole.SELECTOR: _SELECTOR_REQUEST,
}

RESPONSE_SCHEMAS: Dict[AdapterRole, Any] = {
    AdapterRole.PLANNER: _PLANNER_RESPONSE,
    AdapterRole.GENERATOR: GeneratorResponse,
    AdapterRole.TRACKER: TrackerResponse,
    AdapterRole.DEPTH: DepthResponse,
    AdapterRole.SELECTOR: _SELECTOR_RESPONSE,
}

_DISCRIMINATED = {AdapterRole.PLANNER, AdapterRole.SELECTOR}


def _adapter(schema: Any, role: AdapterRole) -> TypeAdapter:
    if role in _DISCRIMINATED:
        return TypeAdapter(Annotated[schema, Field(discriminator="task")])
    return TypeAdapter(schema)


_REQUEST_ADAPTERS = {role: _adapter(s, role) for role, s in REQUEST_SCHEMAS.items()}
_RESPONSE_ADAPTERS = {role: _adapter(s, role) for role, s in RESPONSE_SCHEMAS.items()}


def _validate(adapters: Dict[AdapterRole, TypeAdapter], role: AdapterRole, body: Any, what: str) -> Dict[str, Any]:
    try:
        model = adapters[role].validate_python(body)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise SchemaViolationError(
            f"{role.value} {what} violates schema at {location}: {first['msg']}", raw=body
        ) from e
    return model.model_dump(mode="json")


def validate_request(role: AdapterRole, body: Any) -> Dict[str, Any]:
    """Validated, normalised request body; raises SchemaViolationError."""
    return _validate(_REQUEST_ADAPTERS, role, body, "request")


def validate_response(role: AdapterRole, body: Any) -> Dict[str, Any]:
    """Validated, normalised response body; raises SchemaViolationError."""
    return _validate(_RESPONSE_ADAPTERS, role, body, "response")


def json_schemas() -> Dict[str, Dict[str, Any]]:
    """Published JSON Schema of every request and response body."""
    schemas = {}
    for role in AdapterRole:
        schemas[f"{role.value}.request"] = _REQUEST_ADAPTERS[role].json_schema()
        schemas[f"{role.value}.response"] = _RESPONSE_ADAPTERS[role].json_schema()
    return schemas


def model_schemas() -> Dict[str, Type[BaseModel]]:
    """Concrete body models by name (used in tests and schema export)."""
    return {
        cls.__name__: cls
        for cls in (
            PlannerAbstractRequest, PlannerAbstractResponse, PlannerUnifyRequest, PlannerUnifyResponse,
            GeneratorRequest, GeneratorResponse, TrackerRequest, TrackerResponse,
            DepthRequest, DepthResponse, SelectGraspRequest, SelectGraspResponse,
            VerifyRequest, VerifyResponse, PlanDocumentSchema,
        )
    }


def plan_json_schema() -> Dict[str, Any]:
    return PlanDocumentSchema.model_json_schema()


def validate_plan_document(body: Any) -> Dict[str, Any]:
    """Validated plan document (TaskPlan.to_dict form); raises SchemaViolationError."""
    try:
        return PlanDocumentSchema.model_validate(body).model_dump(mode="json")
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise SchemaViolationError(f"plan document violates schema at {location}: {first['msg']}", raw=body) from e
