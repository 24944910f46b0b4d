"""
Ramer-Douglas-Peucker polyline simplification in pixel space.
"""
import logging
from typing import List, Optional, Sequence

import numpy as np

from services.core.models import Point2D
from services.dynamics.models import RdpParams
from services.errors import InsufficientDataError

logger = logging.getLogger(__name__)


def segment_distances(points: np.ndarray, start: np.ndarray, end: np.ndarray) -> np.ndarray:
    """
    Distance of each point to the segment [start, end].

    Args:
        points: (N, 2) array
        start: Segment start (2,)
        end: Segment end (2,)

    Returns:
        (N,) distances; a zero-length segment measures distance to ``start``
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    direction = end - start
    length_sq = float(direction @ direction)
    if length_sq == 0.0:
        diff = points - start
    else:
        t = np.clip(((points - start) @ direction) / length_sq, 0.0, 1.0)
        diff = points - (start + t[:, None] * direction)
    return np.hypot(diff[:, 0], diff[:, 1])


def rdp_indices(points: np.ndarray, epsilon: float) -> List[int]:
    """
    Indices of the points kept by RDP.

    A span is split at its farthest interior point (first one on ties) iff that
    distance exceeds ``epsilon``.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(points)
    if n < 2:
        raise InsufficientDataError(f"RDP needs at least 2 points, got {n}")

    keep = np.zeros(n, dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, n - 1)]
    while stack:
        first, last = stack.pop()
        if last - first < 2:
            continue
        distances = segment_distances(points[first + 1:last], points[first], points[last])
        offset = int(np.argmax(distances))
        if distances[offset] > epsilon:
            split = first + 1 + offset
            keep[split] = True
            stack.append((split, last))
            stack.append((first, split))
    return [int(i) for i in np.flatnonzero(keep)]


def simplify_path_rdp(points: Sequence[Point2D], params: Optional[RdpParams] = None) -> List[Point2D]:
    """
    Simplify a pixel path.

    Args:
        points: Ordered pixel path (at least 2 points)
        params: RDP parameters (defaults from config)

    Returns:
        Ordered subsequence of ``points`` containing both endpoints
    """
    params = params or RdpParams()
    array = np.array([[p.u, p.v] for p in points], dtype=float).reshape(-1, 2)
    kept = rdp_indices(array, params.epsilon_px)
    logger.debug(f"RDP kept {len(kept)}/{len(points)} points (eps={params.epsilon_px}px)")
    return [points[i] for i in kept]
