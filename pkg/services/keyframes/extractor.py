import logging
from typing import List, Optional, Sequence

import numpy as np

from services.errors import FrameIndexError, InsufficientDataError
from services.keyframes.models import (
    KeyframeDescriptor,
    KeyframeLabel,
    KeyframeParams,
    LandmarkStream,
)

logger = logging.getLogger(__name__)

MOVING_LABEL = "moving"


def _speeds(stream: LandmarkStream, min_confidence: Optional[float] = None) -> np.ndarray:
    """speeds[i - 1] = ||p_i - p_{i-1}|| for i in 1..T-1."""
    positions = stream.positions() if min_confidence is None else stream.positions(min_confidence)
    return np.linalg.norm(np.diff(positions, axis=0), axis=1)


def _require_motion_data(stream: LandmarkStream):
    if len(stream) < 2:
        raise InsufficientDataError(f"need at least 2 frames, got {len(stream)}")


# ---------------------------------------------------------------------
# Per-frame measures
# ---------------------------------------------------------------------
def frame_speed(stream: LandmarkStream, i: int) -> float:
    """
    Wrist displacement between frame positions i-1 and i.

    Raises:
        FrameIndexError: if i == 0 or i >= len(stream)
    """
    if not 1 <= i < len(stream):
        raise FrameIndexError(f"frame position {i} outside [1, {len(stream) - 1}]")
    return float(_speeds(stream)[i - 1])


def _window_score(speeds: Sequence[float], t: int, half_window: int) -> float:
    last = len(speeds)  # valid speed positions are 1..last
    lo = max(1, t - half_window)
    hi = min(last, t + half_window)
    window = speeds[lo - 1:hi]
    return sum(window) / len(window)


def stationarity_score(stream: LandmarkStream, t: int, half_window: int) -> float:
    """
    Mean wrist speed over the window {t - half_window, ..., t + half_window}.

    The window is clipped to valid speed positions [1, T-1] and the mean is
    taken over the clipped window.

    Args:
        stream: Landmark stream
        t: Frame position in [0, T-1]
        half_window: Window half-width in frames

    Returns:
        Mean speed in pixels/frame
    """
    _require_motion_data(stream)
    if not 0 <= t < len(stream):
        raise FrameIndexError(f"frame position {t} outside [0, {len(stream) - 1}]")
    return _window_score(_speeds(stream).tolist(), t, half_window)


def stationarity_scores(stream: LandmarkStream, params: KeyframeParams) -> List[float]:
    """stationarity_score for every frame position."""
    _require_motion_data(stream)
    speeds = _speeds(stream, params.min_confidence).tolist()
    return [_window_score(speeds, t, params.half_window) for t in range(len(stream))]


# ---------------------------------------------------------------------
# Keyframes
# ---------------------------------------------------------------------
def extract_keyframes(stream: LandmarkStream, params: Optional[KeyframeParams] = None) -> List[int]:
    """
    Key-action frames of a demonstration.

    Frames whose score is strictly below epsilon are candidates. Each maximal
    run of consecutive candidates contributes its minimum-score frame (earliest
    on ties). Representatives are then kept chronologically while their frame
    index is at least ``min_interval`` after the last kept one.

    Args:
        stream: Landmark stream
        params: Keyframe parameters (defaults from config)

    Returns:
        Strictly increasing frame indices
    """
    params = params or KeyframeParams()
    scores = stationarity_scores(stream, params)
    indices = stream.frame_indices

    representatives: List[int] = []
    run_best: Optional[int] = None
    for t, score in enumerate(scores):
        if score < params.epsilon:
            if run_best is None or score < scores[run_best]:
                run_best = t
        elif run_best is not None:
            representatives.append(run_best)
            run_best = None
    if run_best is not None:
        representatives.append(run_best)

    keyframes: List[int] = []
    for t in representatives:
        if keyframes and indices[t] - keyframes[-1] < params.min_interval:
            continue
        keyframes.append(indices[t])

    logger.debug(
        f"Keyframes: {len(representatives)} stationary runs, {len(keyframes)} kept "
        f"(eps={params.epsilon}, dt={params.half_window}, gap={params.min_interval})"
    )
    return keyframes


def describe_keyframes(
    stream: LandmarkStream,
    keyframes: Sequence[int],
    labels: Sequence[KeyframeLabel],
) -> List[KeyframeDescriptor]:
    """
    Caption frames with the scenario's labelled ranges.

    Args:
        stream: Landmark stream the frames come from
        keyframes: Frame indices to describe
        labels: Labelled frame ranges; frames outside all of them are "moving"

    Returns:
        One descriptor per frame, in input order
    """
    by_index = {f.frame_index: f for f in stream.frames}
    descriptors = []
    for frame_index in keyframes:
        text = next((l.text for l in labels if l.start <= frame_index <= l.end), MOVING_LABEL)
        frame = by_index.get(frame_index)
        descriptors.append(KeyframeDescriptor(frame_index, text, frame.wrist if frame else None))
    return descriptors
