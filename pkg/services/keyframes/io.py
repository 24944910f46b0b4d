import logging
import os

from config.settings import LANDMARK_MIN_CONFIDENCE
from services.core.models import Point2D
from services.keyframes.models import LandmarkFrame, LandmarkStream
from utils import load_landmark_rows, read_json, write_json, write_landmark_rows

logger = logging.getLogger(__name__)


def _from_rows(rows) -> LandmarkStream:
    return LandmarkStream(tuple(
        LandmarkFrame(int(r["frame"]), Point2D(float(r["u"]), float(r["v"])), float(r["confidence"]))
        for r in rows
    ))


def _to_rows(stream: LandmarkStream):
    return [
        {"frame": f.frame_index, "u": f.wrist.u, "v": f.wrist.v, "confidence": f.confidence}
        for f in stream.frames
    ]


def load_landmarks(path: str) -> LandmarkStream:
    """
    Load a landmark stream.

    ``.csv`` files use the header ``frame,u,v,confidence``; ``.json`` files hold
    an array of objects with the same keys.
    """
    if path.lower().endswith(".json"):
        rows = read_json(path)
        if not isinstance(rows, list):
            raise ValueError(f"{path}: expected a JSON array of landmark rows")
    else:
        rows = load_landmark_rows(path)
    stream = _from_rows(rows)
    low = sum(1 for f in stream.frames if f.confidence < LANDMARK_MIN_CONFIDENCE)
    logger.info(f"Loaded {len(stream)} landmark frames from {os.path.basename(path)} ({low} low-confidence)")
    return stream


def save_landmarks(stream: LandmarkStream, path: str) -> str:
    if path.lower().endswith(".json"):
        return write_json(path, _to_rows(stream), sort_keys=False)
    write_landmark_rows(path, _to_rows(stream))
    return path
