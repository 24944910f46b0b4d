import logging
from dataclasses import dataclass
from typing import List, Optional

from config.settings import SIM_VERIFY_TOLERANCE
from services.adapters import AdapterRole, ModelSuite
from services.core.geometry import placement_verdict
from services.core.models import Predicate, Relation, SceneState, SubtaskSpec
from services.errors import GroundingError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VerificationResult:
    passed: bool
    reason: Optional[str] = None  # out-of-region | disturbed


def _ungrounded(scene: SceneState, subtask: SubtaskSpec) -> List[str]:
    missing = []
    if scene.get_object(subtask.obj) is None:
        missing.append(subtask.obj)
    if scene.get_region(subtask.loc) is None:
        missing.append(subtask.loc)
    return missing


def verify_subtask(scene: SceneState, subtask: SubtaskSpec, tolerance: float = SIM_VERIFY_TOLERANCE) -> VerificationResult:
    """
    Geometric verdict on a finished subtask.

    Passes iff the object's centre lies in the destination region expanded by
    ``tolerance`` and the object is not flagged disturbed.

    Raises:
        GroundingError: object or destination is not in the scene
    """
    missing = _ungrounded(scene, subtask)
    if missing:
        raise GroundingError(f"cannot verify '{subtask.desc}'", missing)
    passed, reason = placement_verdict(scene, subtask.obj, subtask.loc, tolerance)
    return VerificationResult(passed, reason)


def verify_with_selector(
    scene: SceneState,
    subtask: SubtaskSpec,
    suite: ModelSuite,
    tolerance: float = SIM_VERIFY_TOLERANCE,
    subtask_index: int = 0,
    attempt: int = 0,
) -> VerificationResult:
    """Ask the selector role for a verdict on the post-execution scene."""
    missing = _ungrounded(scene, subtask)
    if missing:
        raise GroundingError(f"cannot verify '{subtask.desc}'", missing)
    body = suite.call(AdapterRole.SELECTOR, {
        "task": "verify",
        "subtask": subtask.to_dict(),
        "scene": scene.to_dict(),
        "tolerance": tolerance,
        "subtask_index": subtask_index,
        "attempt": attempt,
    })
    if body["reason"] == "ungrounded":
        raise GroundingError(f"verifier could not ground '{subtask.desc}'", [subtask.obj, subtask.loc])
    result = VerificationResult(body["passed"], None if body["passed"] else body["reason"] or "out-of-region")
    logger.debug(f"Verify subtask {subtask_index}: passed={result.passed} reason={result.reason}")
    return result


# ---------------------------------------------------------------------
# Preconditions
# ---------------------------------------------------------------------
def precondition_holds(scene: SceneState, pred: Predicate, tolerance: float = 0.0) -> bool:
    obj = scene.get_object(pred.subject)
    if obj is None:
        return False
    if pred.relation == Relation.HOLDING:
        return scene.held_object == pred.subject
    region = scene.get_region(pred.object)
    return region is not None and region.contains(obj.position, tolerance)


def unmet_preconditions(scene: SceneState, subtask: SubtaskSpec, tolerance: float = 0.0) -> List[Predicate]:
    return [p for p in subtask.precond if not precondition_holds(scene, p, tolerance)]
