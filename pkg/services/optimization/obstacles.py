import logging
from typing import Iterable, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from services.core.models import Point3D
from services.errors import NoObstacleError

logger = logging.getLogger(__name__)


def _distances(points: np.ndarray, query: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum((points - query) ** 2, axis=1))


class ObstacleIndex:
    """
    Immutable KD-tree over obstacle points.

    Nearest-neighbour answers are exact: the tree proposes candidates and the
    distance is recomputed directly, ties going to the smallest point index.
    """

    def __init__(self, points: np.ndarray):
        points = np.array(points, dtype=float).reshape(-1, 3)
        points.setflags(write=False)
        self._points = points
        self._tree = cKDTree(points) if len(points) else None

    def __len__(self) -> int:
        return len(self._points)

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def is_empty(self) -> bool:
        return self._tree is None

    def nearest(self, query: Union[Point3D, np.ndarray]) -> Tuple[float, int]:
        """
        Nearest obstacle to ``query``.

        Returns:
            (distance, point index)

        Raises:
            NoObstacleError: if the index is empty
        """
        if self._tree is None:
            raise NoObstacleError("nearest-neighbour query on an empty obstacle index")
        q = query.as_array() if isinstance(query, Point3D) else np.asarray(query, dtype=float)
        approx, _ = self._tree.query(q)
        radius = approx * (1.0 + 1e-9) + 1e-12
        candidates = np.array(sorted(self._tree.query_ball_point(q, radius)), dtype=int)
        distances = _distances(self._points[candidates], q)
        best = int(np.argmin(distances))
        return float(distances[best]), int(candidates[best])


def build_obstacle_index(points: Iterable[Union[Point3D, Iterable[float]]]) -> ObstacleIndex:
    """KD-tree index over obstacle points (empty input gives an empty index)."""
    rows = [p.to_list() if isinstance(p, Point3D) else list(p) for p in points]
    index = ObstacleIndex(np.array(rows, dtype=float).reshape(-1, 3))
    logger.debug(f"Built obstacle index with {len(index)} points")
    return index


def nearest_distance(index: ObstacleIndex, query: Union[Point3D, np.ndarray]) -> float:
    """Exact distance from ``query`` to the closest obstacle point."""
    return index.nearest(query)[0]
