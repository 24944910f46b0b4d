from services.dynamics.models import FutureRollout, Observation, RdpParams, RolloutFrame
from services.dynamics.camera import backproject, depth_at, project
from services.dynamics.rdp import rdp_indices, segment_distances, simplify_path_rdp
from services.dynamics.predictor import extract_trajectory, imagine_future, predict_trajectory

__all__ = [
    "FutureRollout",
    "Observation",
    "RdpParams",
    "RolloutFrame",
    "backproject",
    "depth_at",
    "project",
    "rdp_indices",
    "segment_distances",
    "simplify_path_rdp",
    "extract_trajectory",
    "imagine_future",
    "predict_trajectory",
]
