from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config.settings import (
    KEYFRAME_EPSILON,
    KEYFRAME_HALF_WINDOW,
    KEYFRAME_MIN_INTERVAL,
    LANDMARK_MIN_CONFIDENCE,
)
from services.core.models import Point2D


class KeyframeParams(BaseModel):
    """Stationarity test parameters (30 fps demonstrations)."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    epsilon: float = Field(KEYFRAME_EPSILON, gt=0, description="stationarity threshold (px/frame)")
    half_window: int = Field(KEYFRAME_HALF_WINDOW, ge=1, description="window half-width (frames)")
    min_interval: int = Field(KEYFRAME_MIN_INTERVAL, ge=1, description="minimum keyframe gap (frames)")
    min_confidence: float = Field(LANDMARK_MIN_CONFIDENCE, ge=0, le=1)


@dataclass(frozen=True)
class LandmarkFrame:
    frame_index: int
    wrist: Point2D
    confidence: float


@dataclass(frozen=True)
class LandmarkStream:
    """Per-frame wrist pixel positions of one demonstration."""
    frames: Tuple[LandmarkFrame, ...]

    def __post_init__(self):
        for prev, cur in zip(self.frames, self.frames[1:]):
            if cur.frame_index <= prev.frame_index:
                raise ValueError(f"frame indices not strictly increasing at {cur.frame_index}")
        for frame in self.frames:
            if not 0.0 <= frame.confidence <= 1.0:
                raise ValueError(f"confidence out of [0, 1] at frame {frame.frame_index}")
            if not frame.wrist.is_finite():
                raise ValueError(f"non-finite wrist position at frame {frame.frame_index}")

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def frame_indices(self) -> List[int]:
        return [f.frame_index for f in self.frames]

    def positions(self, min_confidence: float = LANDMARK_MIN_CONFIDENCE) -> np.ndarray:
        """
        Wrist positions (T x 2) with low-confidence frames bridged.

        Frames below ``min_confidence`` are replaced by linear interpolation
        over frame index between the nearest confident frames; leading and
        trailing gaps hold the nearest confident position.
        """
        raw = np.array([[f.wrist.u, f.wrist.v] for f in self.frames], dtype=float).reshape(-1, 2)
        confident = np.array([f.confidence >= min_confidence for f in self.frames], dtype=bool)
        if confident.all() or not confident.any():
            return raw
        index = np.array(self.frame_indices, dtype=float)
        bridged = raw.copy()
        for axis in range(2):
            bridged[~confident, axis] = np.interp(index[~confident], index[confident], raw[confident, axis])
        return bridged

    @classmethod
    def from_positions(cls, positions, confidence: float = 1.0, start: int = 0) -> "LandmarkStream":
        """Stream with consecutive frame indices from an (T x 2) array."""
        return cls(tuple(
            LandmarkFrame(start + i, Point2D(float(u), float(v)), confidence)
            for i, (u, v) in enumerate(np.asarray(positions, dtype=float))
        ))


@dataclass(frozen=True)
class KeyframeLabel:
    """Scenario annotation: frames [start, end] show ``text`` (e.g. "grasp apple")."""
    start: int
    end: int
    text: str


@dataclass(frozen=True)
class KeyframeDescriptor:
    """A frame handed to the planner, with its caption."""
    frame_index: int
    label: str
    wrist: Optional[Point2D] = None

    def to_dict(self) -> dict:
        data = {"frame_index": self.frame_index, "label": self.label}
        if self.wrist is not None:
            data["wrist"] = [self.wrist.u, self.wrist.v]
        return data
