"""
Shared geometric and planning value types.

All lengths are meters, image quantities pixels and frames integer indices.
Types are frozen dataclasses; "mutation" returns a new instance.
"""
import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

_ID_SUFFIX = re.compile(r"_\d+$")


def default_category(identifier: str) -> str:
    """Category of an id without explicit category: ``apple_1`` -> ``apple``."""
    return _ID_SUFFIX.sub("", identifier)


# ---------------------------------------------------------------------
# Points and cameras
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class Point2D:
    """Pixel coordinates (u = column, v = row)."""
    u: float
    v: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v], dtype=float)

    @classmethod
    def from_seq(cls, values: Sequence[float]) -> "Point2D":
        return cls(float(values[0]), float(values[1]))

    def is_finite(self) -> bool:
        return math.isfinite(self.u) and math.isfinite(self.v)


@dataclass(frozen=True)
class Point3D:
    """Metric point; the frame (camera or world) is given by context."""
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def to_list(self) -> List[float]:
        return [self.x, self.y, self.z]

    @classmethod
    def from_seq(cls, values: Sequence[float]) -> "Point3D":
        return cls(float(values[0]), float(values[1]), float(values[2]))

    def distance_to(self, other: "Point3D") -> float:
        return float(np.linalg.norm(self.as_array() - other.as_array()))

    def is_finite(self) -> bool:
        return all(math.isfinite(c) for c in (self.x, self.y, self.z))


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics without distortion."""
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")

    def contains(self, pixel: Point2D) -> bool:
        return 0.0 <= pixel.u < self.width and 0.0 <= pixel.v < self.height

    def to_dict(self) -> Dict[str, Any]:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
                "width": self.width, "height": self.height}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CameraIntrinsics":
        return cls(fx=float(data["fx"]), fy=float(data["fy"]), cx=float(data["cx"]),
                   cy=float(data["cy"]), width=int(data["width"]), height=int(data["height"]))


@dataclass(frozen=True)
class CameraExtrinsics:
    """World-from-camera rigid transform: p_world = R @ p_cam + t."""
    rotation: Tuple[Tuple[float, float, float], ...] = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    translation: Point3D = Point3D(0.0, 0.0, 0.0)

    def __post_init__(self):
        r = self.matrix
        if r.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-6) or abs(np.linalg.det(r) - 1.0) > 1e-6:
            raise ValueError("rotation must be a proper orthonormal matrix")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.rotation, dtype=float)

    def to_world(self, point: Point3D) -> Point3D:
        return Point3D.from_seq(self.matrix @ point.as_array() + self.translation.as_array())

    def to_camera(self, point: Point3D) -> Point3D:
        return Point3D.from_seq(self.matrix.T @ (point.as_array() - self.translation.as_array()))

    def to_dict(self) -> Dict[str, Any]:
        return {"rotation": [list(row) for row in self.rotation], "translation": self.translation.to_list()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CameraExtrinsics":
        rotation = tuple(tuple(float(v) for v in row) for row in data["rotation"])
        return cls(rotation=rotation, translation=Point3D.from_seq(data["translation"]))


# ---------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    """Ordered 3D waypoints with the source frame of each waypoint."""
    waypoints: Tuple[Point3D, ...]
    frame_index: Tuple[int, ...]
    object_id: str

    def __post_init__(self):
        if len(self.waypoints) == 0:
            raise ValueError("trajectory needs at least one waypoint")
        if len(self.waypoints) != len(self.frame_index):
            raise ValueError("waypoints and frame_index differ in length")
        if any(f < 0 for f in self.frame_index):
            raise ValueError("frame indices must be non-negative")
        if any(b <= a for a, b in zip(self.frame_index, self.frame_index[1:])):
            raise ValueError("frame indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.waypoints)

    @property
    def is_executable(self) -> bool:
        return len(self.waypoints) >= 2

    def as_array(self) -> np.ndarray:
        return np.array([p.to_list() for p in self.waypoints], dtype=float).reshape(-1, 3)

    def with_positions(self, positions: np.ndarray) -> "Trajectory":
        """Same frames and object, new coordinates (shape M x 3)."""
        points = tuple(Point3D.from_seq(row) for row in np.asarray(positions, dtype=float))
        return replace(self, waypoints=points)

    @classmethod
    def from_array(cls, positions: np.ndarray, object_id: str,
                   frame_index: Optional[Sequence[int]] = None) -> "Trajectory":
        positions = np.asarray(positions, dtype=float).reshape(-1, 3)
        frames = tuple(frame_index) if frame_index is not None else tuple(range(len(positions)))
        return cls(tuple(Point3D.from_seq(p) for p in positions), tuple(int(f) for f in frames), object_id)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "object_id": self.object_id,
            "frame_index": list(self.frame_index),
            "waypoints": [p.to_list() for p in self.waypoints],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Trajectory":
        return cls(
            waypoints=tuple(Point3D.from_seq(p) for p in data["waypoints"]),
            frame_index=tuple(int(f) for f in data["frame_index"]),
            object_id=str(data["object_id"]),
        )


# ---------------------------------------------------------------------
# Plans
# ---------------------------------------------------------------------

class Relation(str, Enum):
    ON = "on"
    HOLDING = "holding"


@dataclass(frozen=True)
class Predicate:
    """``on(subject, object)`` or ``holding(subject)``."""
    subject: str
    relation: Relation
    object: Optional[str] = None

    def __post_init__(self):
        if self.relation == Relation.ON and not self.object:
            raise ValueError("on() needs an object")

    def __str__(self) -> str:
        if self.relation == Relation.HOLDING:
            return f"holding({self.subject})"
        return f"{self.relation.value}({self.subject}, {self.object})"

    def to_dict(self) -> Dict[str, Any]:
        return {"subject": self.subject, "relation": self.relation.value, "object": self.object}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Predicate":
        return cls(subject=data["subject"], relation=Relation(data["relation"]), object=data.get("object"))


@dataclass(frozen=True)
class SubtaskSpec:
    """One subtask: description, object, destination, generation prompt, preconditions."""
    desc: str
    obj: str
    loc: str
    guide: str
    precond: Tuple[Predicate, ...] = ()

    def __post_init__(self):
        for name in ("desc", "obj", "loc", "guide"):
            if not getattr(self, name).strip():
                raise ValueError(f"subtask field '{name}' must be non-empty")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "desc": self.desc,
            "obj": self.obj,
            "loc": self.loc,
            "guide": self.guide,
            "precond": [p.to_dict() for p in self.precond],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SubtaskSpec":
        return cls(
            desc=data["desc"], obj=data["obj"], loc=data["loc"], guide=data["guide"],
            precond=tuple(Predicate.from_dict(p) for p in data.get("precond", [])),
        )


class PlanningMode(str, Enum):
    MIMIC = "mimic"
    CONSTRAINED = "constrained"
    SKILL_TRANSFER = "skill-transfer"
    TEXT_ONLY = "text-only"


@dataclass(frozen=True)
class TaskPlan:
    subtasks: Tuple[SubtaskSpec, ...]
    provenance: PlanningMode

    def __post_init__(self):
        if not self.subtasks:
            raise ValueError("task plan must contain at least one subtask")

    def __len__(self) -> int:
        return len(self.subtasks)

    def to_dict(self) -> Dict[str, Any]:
        return {"provenance": self.provenance.value, "subtasks": [s.to_dict() for s in self.subtasks]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TaskPlan":
        return cls(
            subtasks=tuple(SubtaskSpec.from_dict(s) for s in data["subtasks"]),
            provenance=PlanningMode(data["provenance"]),
        )


# ---------------------------------------------------------------------
# Scene
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class SceneObject:
    id: str
    position: Point3D
    radius: float
    yaw: Optional[float] = None
    category: str = ""
    disturbed: bool = False

    @property
    def semantic_category(self) -> str:
        return self.category or default_category(self.id)

    def moved_to(self, position: Point3D) -> "SceneObject":
        return replace(self, position=position)


@dataclass(frozen=True)
class Region:
    """Axis-aligned destination box."""
    id: str
    min: Point3D
    max: Point3D
    category: str = ""

    @property
    def semantic_category(self) -> str:
        return self.category or default_category(self.id)

    @property
    def center(self) -> Point3D:
        return Point3D.from_seq((self.min.as_array() + self.max.as_array()) / 2.0)

    def contains(self, point: Point3D, tolerance: float = 0.0) -> bool:
        p = point.as_array()
        return bool(np.all(p >= self.min.as_array() - tolerance) and np.all(p <= self.max.as_array() + tolerance))


@dataclass(frozen=True)
class SceneState:
    """World model: objects, destination regions, obstacle points, held object."""
    objects: Tuple[SceneObject, ...] = ()
    regions: Tuple[Region, ...] = ()
    obstacles: Tuple[Point3D, ...] = ()
    held_object: Optional[str] = None

    # -----------------------------------------------------------------

    @property
    def object_ids(self) -> List[str]:
        return [o.id for o in self.objects]

    @property
    def region_ids(self) -> List[str]:
        return [r.id for r in self.regions]

    def get_object(self, object_id: str) -> Optional[SceneObject]:
        return next((o for o in self.objects if o.id == object_id), None)

    def get_region(self, region_id: str) -> Optional[Region]:
        return next((r for r in self.regions if r.id == region_id), None)

    def with_object(self, updated: SceneObject) -> "SceneState":
        objects = tuple(updated if o.id == updated.id else o for o in self.objects)
        return replace(self, objects=objects)

    def obstacle_array(self) -> np.ndarray:
        return np.array([p.to_list() for p in self.obstacles], dtype=float).reshape(-1, 3)

    # -----------------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        objects: Dict[str, Any] = {}
        for o in self.objects:
            entry: Dict[str, Any] = {"position": o.position.to_list(), "radius": o.radius}
            if o.yaw is not None:
                entry["yaw"] = o.yaw
            if o.category:
                entry["category"] = o.category
            if o.disturbed:
                entry["disturbed"] = True
            objects[o.id] = entry
        regions: Dict[str, Any] = {}
        for r in self.regions:
            entry = {"min": r.min.to_list(), "max": r.max.to_list()}
            if r.category:
                entry["category"] = r.category
            regions[r.id] = entry
        return {
            "objects": objects,
            "regions": regions,
            "obstacles": [p.to_list() for p in self.obstacles],
            "held_object": self.held_object,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SceneState":
        """Parse the scene document; ``objects``/``regions`` are maps or (id, entry) pair lists."""
        return cls(
            objects=tuple(
                SceneObject(
                    id=str(oid),
                    position=Point3D.from_seq(entry["position"]),
                    radius=float(entry["radius"]),
                    yaw=None if entry.get("yaw") is None else float(entry["yaw"]),
                    category=str(entry.get("category", "")),
                    disturbed=bool(entry.get("disturbed", False)),
                )
                for oid, entry in _entries(data.get("objects", {}))
            ),
            regions=tuple(
                Region(
                    id=str(rid),
                    min=Point3D.from_seq(entry["min"]),
                    max=Point3D.from_seq(entry["max"]),
                    category=str(entry.get("category", "")),
                )
                for rid, entry in _entries(data.get("regions", {}))
            ),
            obstacles=tuple(Point3D.from_seq(p) for p in data.get("obstacles", [])),
            held_object=data.get("held_object"),
        )


def _entries(section: Any) -> Iterable[Tuple[str, Dict[str, Any]]]:
    if isinstance(section, dict):
        return list(section.items())
    return [(pair[0], pair[1]) for pair in section]


# ---------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    """A violated invariant and the id that violates it."""
    invariant: str
    subject: str
    message: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"[{self.invariant}] {self.subject}: {self.message}"
