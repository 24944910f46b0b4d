from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from services.core.models import PlanningMode


@dataclass(frozen=True)
class BaselineStep:
    action: str
    object: str
    destination: str

    def to_dict(self, keyframes: Tuple[int, ...]) -> Dict[str, Any]:
        return {"action": self.action, "object": self.object, "destination": self.destination,
                "keyframes": list(keyframes)}


@dataclass(frozen=True)
class BaselinePlan:
    """Descriptive plan abstracted from the demonstration."""
    steps: Tuple[BaselineStep, ...]
    source_keyframes: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if not self.steps:
            raise ValueError("baseline plan must have at least one step")
        if len(self.steps) != len(self.source_keyframes):
            raise ValueError("every step needs its source keyframes")
        if any(len(frames) == 0 for frames in self.source_keyframes):
            raise ValueError("every step must map to at least one keyframe")

    def __len__(self) -> int:
        return len(self.steps)

    def to_dict(self) -> Dict[str, Any]:
        return {"steps": [s.to_dict(k) for s, k in zip(self.steps, self.source_keyframes)]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BaselinePlan":
        steps = data["steps"]
        return cls(
            steps=tuple(BaselineStep(s["action"], s["object"], s["destination"]) for s in steps),
            source_keyframes=tuple(tuple(int(f) for f in s["keyframes"]) for s in steps),
        )


@dataclass(frozen=True)
class SceneEntry:
    """One line of the scene summary handed to the planner."""
    id: str
    category: str
    region: Optional[str] = None
    kind: str = "object"

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.id, "category": self.category, "region": self.region, "kind": self.kind}


@dataclass(frozen=True)
class PlanningRequest:
    baseline: Optional[BaselinePlan]
    scene_summary: Tuple[SceneEntry, ...]
    language: Optional[str] = None
    mode: PlanningMode = PlanningMode.MIMIC

    def __post_init__(self):
        if self.mode == PlanningMode.MIMIC and self.language:
            raise ValueError("mimic mode takes no language command")
        if self.mode == PlanningMode.TEXT_ONLY:
            if self.baseline is not None:
                raise ValueError("text-only mode takes no demonstration baseline")
            if not self.language:
                raise ValueError("text-only mode needs a language command")
        elif self.baseline is None:
            raise ValueError(f"{self.mode.value} mode needs a demonstration baseline")
        if self.mode == PlanningMode.CONSTRAINED and not self.language:
            raise ValueError("constrained mode needs a language command")

    @property
    def object_ids(self) -> List[str]:
        return [e.id for e in self.scene_summary if e.kind == "object"]

    @property
    def region_ids(self) -> List[str]:
        return [e.id for e in self.scene_summary if e.kind == "region"]

    def to_payload(self) -> Dict[str, Any]:
        return {
            "task": "unify",
            "mode": self.mode.value,
            "baseline": self.baseline.to_dict() if self.baseline else None,
            "scene": [e.to_dict() for e in self.scene_summary],
            "language": self.language,
        }
