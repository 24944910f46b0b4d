from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

from services.core.models import CameraExtrinsics, CameraIntrinsics, Point3D, SceneObject, SceneState
from utils import dump_json

FAILURE_REASONS = ("plan", "predict", "execute", "verify")


# ---------------------------------------------------------------------
# Grasps
# ---------------------------------------------------------------------
@dataclass(frozen=True)
class GraspCandidate:
    """Gripper pose proposed for one object."""
    id: int
    pose: Point3D
    stability: float
    yaw: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.stability <= 1.0:
            raise ValueError(f"grasp {self.id}: stability {self.stability} outside [0, 1]")

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.id, "pose": self.pose.to_list(), "yaw": self.yaw, "stability": self.stability}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GraspCandidate":
        return cls(
            id=int(data["id"]),
            pose=Point3D.from_seq(data["pose"]),
            stability=float(data["stability"]),
            yaw=float(data.get("yaw", 0.0)),
        )


@dataclass(frozen=True)
class GraspOffset:
    """Scenario grasp, stored relative to the object centre so it follows the object."""
    id: int
    offset: Tuple[float, float, float]
    stability: float
    yaw: float = 0.0

    def at(self, obj: SceneObject) -> GraspCandidate:
        p = obj.position
        return GraspCandidate(
            id=self.id,
            pose=Point3D(p.x + self.offset[0], p.y + self.offset[1], p.z + self.offset[2]),
            stability=self.stability,
            yaw=self.yaw,
        )


# ---------------------------------------------------------------------
# Execution log
# ---------------------------------------------------------------------
@dataclass(frozen=True)
class StepRecord:
    step: int
    gripper: Point3D
    held_object: Optional[str]

    def to_dict(self) -> Dict[str, Any]:
        return {"step": self.step, "gripper": self.gripper.to_list(), "held_object": self.held_object}


@dataclass(frozen=True)
class CollisionEvent:
    """Gripper came closer than the clearance to an obstacle point or another object."""
    step: int
    segment: int
    distance: float
    kind: str  # obstacle | object
    target: str

    def to_dict(self) -> Dict[str, Any]:
        return {"step": self.step, "segment": self.segment, "distance": self.distance,
                "kind": self.kind, "target": self.target}


@dataclass
class ExecutionLog:
    """Per-step gripper trace of one trajectory execution."""
    steps: List[StepRecord] = field(default_factory=list)
    collisions: List[CollisionEvent] = field(default_factory=list)
    outcome: str = "released"
    simulator_id: int = field(default=0, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "steps": [s.to_dict() for s in self.steps],
            "collisions": [c.to_dict() for c in self.collisions],
            "outcome": self.outcome,
        }

    def to_json(self) -> bytes:
        return dump_json(self.to_dict())


# ---------------------------------------------------------------------
# Trial results
# ---------------------------------------------------------------------
@dataclass(frozen=True)
class SubtaskOutcome:
    index: int
    obj: str
    loc: str
    passed: bool
    reason: Optional[str] = None
    attempts: int = 0

    def __post_init__(self):
        if self.passed and self.reason is not None:
            raise ValueError("a passed subtask carries no failure reason")
        if not self.passed and self.reason not in FAILURE_REASONS:
            raise ValueError(f"failure reason must be one of {FAILURE_REASONS}, got {self.reason!r}")

    def to_dict(self) -> Dict[str, Any]:
        return {"index": self.index, "obj": self.obj, "loc": self.loc, "passed": self.passed,
                "reason": self.reason, "attempts": self.attempts}


@dataclass(frozen=True)
class TrialResult:
    """
    Outcome of one pipeline run.

    ``subtask_outcomes`` always has ``expected_subtasks`` entries: a plan that
    is shorter than expected is padded with failed "plan" outcomes and a
    longer one is cut.
    """
    trial: int
    seed: int
    subtask_outcomes: Tuple[SubtaskOutcome, ...]
    replans_used: int = 0
    collision_events: int = 0

    @property
    def expected_subtasks(self) -> int:
        return len(self.subtask_outcomes)

    @property
    def n_i(self) -> int:
        return sum(1 for o in self.subtask_outcomes if o.passed)

    @property
    def S_i(self) -> int:
        return int(bool(self.subtask_outcomes) and self.n_i == len(self.subtask_outcomes))

    @property
    def failure_modes(self) -> List[str]:
        return [o.reason for o in self.subtask_outcomes if not o.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "trial": self.trial,
            "seed": self.seed,
            "S_i": self.S_i,
            "n_i": self.n_i,
            "replans_used": self.replans_used,
            "collision_events": self.collision_events,
            "subtask_outcomes": [o.to_dict() for o in self.subtask_outcomes],
        }

    def to_row(self) -> Dict[str, Any]:
        return {
            "trial": self.trial,
            "seed": self.seed,
            "S_i": self.S_i,
            "n_i": self.n_i,
            "replans": self.replans_used,
            "failure_modes": self.failure_modes,
        }


def failed_outcomes(expected: int, reason: str, start: int = 0,
                    pairs: Optional[List[Tuple[str, str]]] = None) -> List[SubtaskOutcome]:
    """Failed outcomes for subtasks ``start`` .. ``expected - 1``."""
    pairs = pairs or []
    outcomes = []
    for n in range(start, expected):
        obj, loc = pairs[n] if n < len(pairs) else ("", "")
        outcomes.append(SubtaskOutcome(n, obj, loc, False, reason))
    return outcomes


# ---------------------------------------------------------------------
# Workcell
# ---------------------------------------------------------------------
@dataclass(frozen=True)
class Workcell:
    """Everything the runner needs about the physical setup of one trial."""
    scene: SceneState
    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics
    grasps: Mapping[str, Tuple[GraspOffset, ...]] = field(default_factory=dict)
