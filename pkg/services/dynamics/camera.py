import math

import numpy as np

from services.core.models import CameraIntrinsics, Point2D, Point3D
from services.dynamics.models import DepthMap
from services.errors import DepthGapError, InvalidDepthError


def backproject(pixel: Point2D, depth: float, intrinsics: CameraIntrinsics) -> Point3D:
    """
    Lift a pixel with known depth to a camera-frame point.

    Raises:
        InvalidDepthError: if depth <= 0 or not finite
    """
    if not (math.isfinite(depth) and depth > 0):
        raise InvalidDepthError(f"depth must be > 0, got {depth}")
    return Point3D(
        (pixel.u - intrinsics.cx) * depth / intrinsics.fx,
        (pixel.v - intrinsics.cy) * depth / intrinsics.fy,
        depth,
    )


def project(point: Point3D, intrinsics: CameraIntrinsics) -> Point2D:
    """Pinhole projection of a camera-frame point (z > 0)."""
    if not point.z > 0:
        raise InvalidDepthError(f"point behind the camera (z={point.z})")
    return Point2D(
        intrinsics.fx * point.x / point.z + intrinsics.cx,
        intrinsics.fy * point.y / point.z + intrinsics.cy,
    )


def round_pixel(pixel: Point2D):
    return int(math.floor(pixel.u + 0.5)), int(math.floor(pixel.v + 0.5))


def depth_at(depth: DepthMap, pixel: Point2D, radius: int) -> float:
    """
    Depth at a pixel, with hole filling.

    The pixel is rounded; if no depth is defined there, the median of defined
    depths within ``radius`` pixels (Euclidean) is used.

    Raises:
        DepthGapError: if nothing is defined within the radius
    """
    u0, v0 = round_pixel(pixel)

    if isinstance(depth, np.ndarray):
        height, width = depth.shape
        if 0 <= v0 < height and 0 <= u0 < width and np.isfinite(depth[v0, u0]):
            return float(depth[v0, u0])
        vs, us = np.mgrid[max(0, v0 - radius):min(height, v0 + radius + 1),
                          max(0, u0 - radius):min(width, u0 + radius + 1)]
        mask = (us - u0) ** 2 + (vs - v0) ** 2 <= radius * radius
        values = depth[vs[mask], us[mask]]
        values = values[np.isfinite(values)]
    else:
        exact = depth.get((u0, v0))
        if exact is not None:
            return float(exact)
        values = np.array([
            z for (u, v), z in depth.items()
            if (u - u0) ** 2 + (v - v0) ** 2 <= radius * radius
        ], dtype=float)

    if values.size == 0:
        raise DepthGapError(f"no depth within {radius}px of ({pixel.u:.1f}, {pixel.v:.1f})")
    return float(np.median(values))
