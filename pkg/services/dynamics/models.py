from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config.settings import DEPTH_FALLBACK_RADIUS_PX, RDP_EPSILON_PX
from services.core.models import CameraExtrinsics, CameraIntrinsics, Point2D, SceneState

# Sparse depth: integer pixel (u, v) -> metres
SparseDepth = Mapping[Tuple[int, int], float]
DepthMap = Union[SparseDepth, np.ndarray]


class RdpParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    epsilon_px: float = Field(RDP_EPSILON_PX, gt=0, description="simplification tolerance (px)")
    depth_radius_px: int = Field(DEPTH_FALLBACK_RADIUS_PX, ge=0, description="depth hole fallback radius (px)")


@dataclass(frozen=True)
class RolloutFrame:
    """One imagined frame: tracked pixels and a depth map (sparse dict or dense H x W array)."""
    tracks: Mapping[str, Point2D]
    depth: DepthMap = field(default_factory=dict)


@dataclass(frozen=True)
class FutureRollout:
    """Imagined frame sequence for one subtask."""
    frames: Tuple[RolloutFrame, ...]
    intrinsics: CameraIntrinsics

    def __post_init__(self):
        if len(self.frames) < 2:
            raise ValueError(f"rollout needs at least 2 frames, got {len(self.frames)}")
        for k, frame in enumerate(self.frames):
            for oid, pixel in frame.tracks.items():
                if not (pixel.is_finite() and self.intrinsics.contains(pixel)):
                    raise ValueError(f"frame {k}: track of {oid} at ({pixel.u}, {pixel.v}) is outside the image")
            depth = frame.depth
            if isinstance(depth, np.ndarray):
                if depth.shape != (self.intrinsics.height, self.intrinsics.width):
                    raise ValueError(f"frame {k}: dense depth shape {depth.shape} does not match the image")
                defined = depth[np.isfinite(depth)]
                if np.any(defined <= 0):
                    raise ValueError(f"frame {k}: depth must be > 0 where defined")
            elif any(not z > 0 for z in depth.values()):
                raise ValueError(f"frame {k}: depth must be > 0 where defined")

    def __len__(self) -> int:
        return len(self.frames)

    def track(self, object_id: str) -> Optional[Tuple[Point2D, ...]]:
        """Pixels of ``object_id`` in every frame, or None if any frame misses it."""
        if not all(object_id in f.tracks for f in self.frames):
            return None
        return tuple(f.tracks[object_id] for f in self.frames)

    # -----------------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        frames = []
        for frame in self.frames:
            if isinstance(frame.depth, np.ndarray):
                rows, cols = np.nonzero(np.isfinite(frame.depth))
                depth = {f"{u},{v}": float(frame.depth[v, u]) for v, u in zip(rows, cols)}
            else:
                depth = {f"{u},{v}": float(z) for (u, v), z in sorted(frame.depth.items())}
            frames.append({
                "tracks": {oid: [p.u, p.v] for oid, p in sorted(frame.tracks.items())},
                "depth": depth,
            })
        return {"frames": frames, "intrinsics": self.intrinsics.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FutureRollout":
        frames = []
        for entry in data["frames"]:
            depth = {}
            for key, z in entry.get("depth", {}).items():
                u, v = key.split(",")
                depth[(int(u), int(v))] = float(z)
            tracks = {oid: Point2D.from_seq(p) for oid, p in entry.get("tracks", {}).items()}
            frames.append(RolloutFrame(tracks=tracks, depth=depth))
        return cls(frames=tuple(frames), intrinsics=CameraIntrinsics.from_dict(data["intrinsics"]))


@dataclass(frozen=True)
class Observation:
    """What the generator sees before a subtask: scene plus camera."""
    scene: SceneState
    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics
    subtask_index: int = 0
    attempt: int = 0

    def camera_dict(self) -> Dict[str, Any]:
        return {"intrinsics": self.intrinsics.to_dict(), "extrinsics": self.extrinsics.to_dict()}
