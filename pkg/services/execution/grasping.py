import logging
from typing import List, Optional, Sequence

import numpy as np

from services.adapters import AdapterRole, ModelSuite
from services.core.models import Point3D, SceneObject
from services.errors import NoGraspError, SchemaViolationError
from services.execution.models import GraspCandidate

logger = logging.getLogger(__name__)

# (offset from object centre in m, stability) of proposed grasps
PROPOSAL_TEMPLATE = (
    ((0.0, 0.0, 0.005), 0.9),
    ((0.006, 0.0, 0.005), 0.7),
    ((0.0, 0.006, 0.005), 0.6),
)


def propose_grasps(
    obj: SceneObject,
    rng: Optional[np.random.Generator] = None,
    perturbation: float = 0.0,
) -> List[GraspCandidate]:
    """
    Three top-down grasps around the object centre.

    With ``perturbation`` > 0 each stability is shifted by a uniform draw in
    [-perturbation, perturbation] and clipped to [0, 1].
    """
    candidates = []
    for i, (offset, stability) in enumerate(PROPOSAL_TEMPLATE):
        if perturbation > 0 and rng is not None:
            stability = float(np.clip(stability + rng.uniform(-perturbation, perturbation), 0.0, 1.0))
        pose = Point3D(obj.position.x + offset[0], obj.position.y + offset[1], obj.position.z + offset[2])
        candidates.append(GraspCandidate(id=i, pose=pose, stability=stability, yaw=obj.yaw or 0.0))
    return candidates


def select_grasp(
    candidates: Sequence[GraspCandidate],
    suite: ModelSuite,
    object_id: str = "",
    subtask_index: int = 0,
    attempt: int = 0,
) -> GraspCandidate:
    """
    Let the selector role pick one of the candidates.

    Raises:
        NoGraspError: no candidates
        SchemaViolationError: the selector answered with an id not on offer
    """
    if not candidates:
        raise NoGraspError(f"no grasp candidates for {object_id or 'object'}")
    body = suite.call(AdapterRole.SELECTOR, {
        "task": "select_grasp",
        "object_id": object_id,
        "candidates": [c.to_dict() for c in candidates],
        "subtask_index": subtask_index,
        "attempt": attempt,
    })
    chosen = next((c for c in candidates if c.id == body["selected_id"]), None)
    if chosen is None:
        raise SchemaViolationError(f"selector chose unknown grasp {body['selected_id']}", raw=body)
    logger.debug(f"Grasp {chosen.id} (stability {chosen.stability:.2f}) for {object_id}")
    return chosen
