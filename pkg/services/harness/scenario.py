"""
Scenario files: scene, camera, demonstration and expected subtask count.
"""
import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from services.core.geometry import validate_scene
from services.core.models import CameraExtrinsics, CameraIntrinsics, PlanningMode, Point3D, SceneState
from services.errors import ScenarioError
from services.execution.config import PipelineConfig
from services.execution.models import GraspOffset, Workcell
from services.keyframes import KeyframeLabel, LandmarkStream, load_landmarks
from utils import resolve_path

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------
# File schema
# ---------------------------------------------------------------------
class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class IntrinsicsFile(_Strict):
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int


class ExtrinsicsFile(_Strict):
    rotation: List[List[float]] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    translation: List[float] = [0.0, 0.0, 0.0]


class CameraFile(_Strict):
    intrinsics: IntrinsicsFile
    extrinsics: ExtrinsicsFile = Field(default_factory=ExtrinsicsFile)


class LabelFile(_Strict):
    start: int = Field(ge=0)
    end: int = Field(ge=0)
    text: str = Field(min_length=1)


class DemonstrationFile(_Strict):
    landmarks: str = Field(min_length=1, description="CSV or JSON path, relative to the scenario file")
    labels: List[LabelFile] = []


class GraspFile(_Strict):
    id: int = Field(ge=0)
    offset: List[float] = Field(min_length=3, max_length=3)
    stability: float = Field(ge=0, le=1)
    yaw: float = 0.0


class ScenarioFile(_Strict):
    name: str = Field(min_length=1)
    mode: PlanningMode = PlanningMode.MIMIC
    language: Optional[str] = None
    expected_subtasks: int = Field(ge=1)
    camera: CameraFile
    scene: Dict[str, Any]
    demonstration: Optional[DemonstrationFile] = None
    grasp_candidates: Dict[str, List[GraspFile]] = {}
    placement_jitter: float = Field(0.0, ge=0)
    config: Dict[str, Any] = {}

    @field_validator("grasp_candidates")
    @classmethod
    def _unique_grasp_ids(cls, value):
        for oid, grasps in value.items():
            ids = [g.id for g in grasps]
            if len(ids) != len(set(ids)):
                raise ValueError(f"duplicate grasp ids for {oid}")
        return value


# ---------------------------------------------------------------------
# Loaded scenario
# ---------------------------------------------------------------------
@dataclass(frozen=True)
class Scenario:
    name: str
    path: str
    scene: SceneState
    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics
    expected_subtasks: int
    mode: PlanningMode = PlanningMode.MIMIC
    language: Optional[str] = None
    demonstration: Optional[LandmarkStream] = None
    labels: Tuple[KeyframeLabel, ...] = ()
    grasps: Dict[str, Tuple[GraspOffset, ...]] = field(default_factory=dict)
    placement_jitter: float = 0.0
    config: PipelineConfig = field(default_factory=PipelineConfig)

    def workcell(self, seed: int = 0) -> Workcell:
        """Trial setup; object xy positions are jittered when ``placement_jitter`` > 0."""
        scene = self.scene
        if self.placement_jitter > 0:
            rng = np.random.default_rng(seed)
            objects = []
            for obj in scene.objects:
                dx, dy = rng.uniform(-self.placement_jitter, self.placement_jitter, size=2)
                p = obj.position
                objects.append(replace(obj, position=Point3D(p.x + float(dx), p.y + float(dy), p.z)))
            scene = replace(scene, objects=tuple(objects))
        return Workcell(scene, self.intrinsics, self.extrinsics, self.grasps)


def _reject_duplicates(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise ValueError(f"duplicate key '{key}'")
        seen[key] = value
    return seen


def _parse_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ScenarioError(f"cannot read scenario: {e.strerror}", path) from e
    try:
        data = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as e:
        raise ScenarioError(e.msg, path, f"line {e.lineno}, column {e.colno}") from e
    except ValueError as e:
        raise ScenarioError(str(e), path) from e
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object", path)
    return data


def _first_error(error: ValidationError) -> Tuple[str, str]:
    first = error.errors()[0]
    key = ".".join(str(part) for part in first["loc"]) or "<root>"
    return first["msg"], f"key {key}"


def load_scenario(path: str) -> Scenario:
    """
    Load and validate a scenario file.

    Args:
        path: Scenario JSON file

    Returns:
        Scenario with every cross-reference resolved

    Raises:
        ScenarioError: unreadable or malformed file, invalid fields, missing
            demonstration file, or a scene that fails validation
    """
    raw = _parse_json(path)
    try:
        doc = ScenarioFile.model_validate(raw)
    except ValidationError as e:
        message, context = _first_error(e)
        raise ScenarioError(message, path, context) from e

    try:
        scene = SceneState.from_dict(doc.scene)
        intrinsics = CameraIntrinsics(**doc.camera.intrinsics.model_dump())
        extrinsics = CameraExtrinsics.from_dict(doc.camera.extrinsics.model_dump())
    except (KeyError, TypeError, ValueError) as e:
        raise ScenarioError(str(e), path, "key scene/camera") from e

    diagnostics = validate_scene(scene)
    if diagnostics:
        raise ScenarioError("; ".join(str(d) for d in diagnostics), path, "key scene")

    unknown = sorted(set(doc.grasp_candidates) - set(scene.object_ids))
    if unknown:
        raise ScenarioError(f"grasp candidates for unknown objects {unknown}", path, "key grasp_candidates")

    stream, labels = None, ()
    if doc.demonstration is not None:
        demo_path = resolve_path(path, doc.demonstration.landmarks)
        if not os.path.isfile(demo_path):
            raise ScenarioError(f"demonstration file not found: {demo_path}", path, "key demonstration.landmarks")
        try:
            stream = load_landmarks(demo_path)
        except (OSError, KeyError, ValueError) as e:
            raise ScenarioError(str(e), demo_path) from e
        labels = tuple(KeyframeLabel(l.start, l.end, l.text) for l in doc.demonstration.labels)
    elif doc.mode != PlanningMode.TEXT_ONLY:
        raise ScenarioError(f"{doc.mode.value} mode needs a demonstration", path, "key demonstration")
    if doc.mode in (PlanningMode.TEXT_ONLY, PlanningMode.CONSTRAINED) and not doc.language:
        raise ScenarioError(f"{doc.mode.value} mode needs a language command", path, "key language")
    if doc.mode == PlanningMode.MIMIC and doc.language:
        raise ScenarioError("mimic mode takes no language command", path, "key language")

    try:
        config = PipelineConfig.model_validate(doc.config)
    except ValidationError as e:
        message, context = _first_error(e)
        raise ScenarioError(message, path, f"config {context}") from e

    grasps = {
        oid: tuple(GraspOffset(g.id, tuple(g.offset), g.stability, g.yaw) for g in entries)
        for oid, entries in doc.grasp_candidates.items()
    }
    scenario = Scenario(
        name=doc.name,
        path=path,
        scene=scene,
        intrinsics=intrinsics,
        extrinsics=extrinsics,
        expected_subtasks=doc.expected_subtasks,
        mode=doc.mode,
        language=doc.language,
        demonstration=stream,
        labels=labels,
        grasps=grasps,
        placement_jitter=doc.placement_jitter,
        config=config,
    )
    logger.info(
        f"Scenario {scenario.name}: {len(scene.objects)} objects, {len(scene.regions)} regions, "
        f"{len(scene.obstacles)} obstacle points, M={scenario.expected_subtasks}"
    )
    return scenario


def scenario_json_schema() -> Dict[str, Any]:
    return ScenarioFile.model_json_schema()


def with_mode(scenario: Scenario, mode: PlanningMode) -> Scenario:
    """Scenario re-targeted to another planning mode."""
    if mode == scenario.mode:
        return scenario
    language = scenario.language
    if mode == PlanningMode.MIMIC:
        language = None
    elif mode in (PlanningMode.CONSTRAINED, PlanningMode.TEXT_ONLY) and not language:
        raise ScenarioError(f"{mode.value} mode needs a language command", scenario.path, "key language")
    if mode != PlanningMode.TEXT_ONLY and scenario.demonstration is None:
        raise ScenarioError(f"{mode.value} mode needs a demonstration", scenario.path, "key demonstration")
    return replace(scenario, mode=mode, language=language)
