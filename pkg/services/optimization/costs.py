"""
Smoothness and collision costs of a waypoint path, and their gradient.

C_smooth = sum over interior waypoints of (1 - cos theta_m), theta_m being the
turn between consecutive segments. C_coll = sum over all waypoints of
1 / (d_m + phi), d_m the distance to the nearest obstacle point.
"""
from typing import Union

import numpy as np

from services.core.geometry import SEGMENT_EPS
from services.core.models import Trajectory
from services.optimization.obstacles import ObstacleIndex
from services.optimization.params import OptParams

PathLike = Union[Trajectory, np.ndarray]


def _positions(traj: PathLike) -> np.ndarray:
    if isinstance(traj, Trajectory):
        return traj.as_array()
    return np.asarray(traj, dtype=float).reshape(-1, 3)


def _check_phi(phi: float):
    if not phi > 0:
        raise ValueError(f"phi must be > 0, got {phi}")


def smoothness_cost(traj: PathLike) -> float:
    points = _positions(traj)
    total = 0.0
    for m in range(1, len(points) - 1):
        u = points[m] - points[m - 1]
        v = points[m + 1] - points[m]
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu < SEGMENT_EPS or nv < SEGMENT_EPS:
            continue
        cos = min(1.0, max(-1.0, float(np.dot(u, v) / (nu * nv))))
        total += 1.0 - cos
    return total


def collision_cost(traj: PathLike, index: ObstacleIndex, phi: float) -> float:
    _check_phi(phi)
    if index.is_empty:
        return 0.0
    return float(sum(1.0 / (index.nearest(p)[0] + phi) for p in _positions(traj)))


def total_cost(traj: PathLike, index: ObstacleIndex, params: OptParams) -> float:
    """w_smooth * C_smooth + w_coll * C_coll."""
    cost = params.w_smooth * smoothness_cost(traj) if params.w_smooth else 0.0
    if params.w_coll:
        cost += params.w_coll * collision_cost(traj, index, params.phi)
    return cost


def cost_gradient(traj: PathLike, index: ObstacleIndex, params: OptParams) -> np.ndarray:
    """
    Analytic gradient of total_cost with respect to interior waypoints.

    Returns:
        (M - 2, 3) array; row i is the gradient at waypoint i + 1. The nearest
        obstacle of each waypoint is held fixed; degenerate segments and
        coincident obstacles contribute zero.
    """
    points = _positions(traj)
    count = len(points)
    grad = np.zeros((count, 3))

    if params.w_smooth and count >= 3:
        for m in range(1, count - 1):
            u = points[m] - points[m - 1]
            v = points[m + 1] - points[m]
            nu, nv = np.linalg.norm(u), np.linalg.norm(v)
            if nu < SEGMENT_EPS or nv < SEGMENT_EPS:
                continue
            cos = float(np.dot(u, v) / (nu * nv))
            d_cos_du = v / (nu * nv) - cos * u / (nu * nu)
            d_cos_dv = u / (nu * nv) - cos * v / (nv * nv)
            # term is 1 - cos
            grad[m - 1] += params.w_smooth * d_cos_du
            grad[m] += params.w_smooth * (d_cos_dv - d_cos_du)
            grad[m + 1] -= params.w_smooth * d_cos_dv

    if params.w_coll and not index.is_empty:
        _check_phi(params.phi)
        for m in range(1, count - 1):
            distance, nearest = index.nearest(points[m])
            if distance == 0.0:
                continue
            direction = (points[m] - index.points[nearest]) / distance
            grad[m] -= params.w_coll * direction / (distance + params.phi) ** 2

    return grad[1:-1] if count >= 2 else np.zeros((0, 3))
