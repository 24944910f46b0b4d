from services.keyframes.models import (
    KeyframeDescriptor,
    KeyframeLabel,
    KeyframeParams,
    LandmarkFrame,
    LandmarkStream,
)
from services.keyframes.extractor import (
    describe_keyframes,
    extract_keyframes,
    frame_speed,
    stationarity_score,
    stationarity_scores,
)
from services.keyframes.io import load_landmarks, save_landmarks

__all__ = [
    "KeyframeDescriptor",
    "KeyframeLabel",
    "KeyframeParams",
    "LandmarkFrame",
    "LandmarkStream",
    "describe_keyframes",
    "extract_keyframes",
    "frame_speed",
    "stationarity_score",
    "stationarity_scores",
    "load_landmarks",
    "save_landmarks",
]
