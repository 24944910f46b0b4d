import os

import pytest

from services.core.models import CameraExtrinsics, CameraIntrinsics, Point3D, Region, SceneObject, SceneState

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCENARIOS = os.path.join(ROOT, "data", "scenarios")

# Camera 0.55 m above the table, looking down at 45 degrees along +x
TABLE_ROTATION = (
    (0.0, -0.7071067811865476, 0.7071067811865476),
    (-1.0, 0.0, 0.0),
    (0.0, -0.7071067811865476, -0.7071067811865476),
)


@pytest.fixture
def intrinsics() -> CameraIntrinsics:
    return CameraIntrinsics(fx=500.0, fy=500.0, cx=320.0, cy=240.0, width=640, height=480)


@pytest.fixture
def extrinsics() -> CameraExtrinsics:
    return CameraExtrinsics(rotation=TABLE_ROTATION, translation=Point3D(-0.05, 0.0, 0.55))


@pytest.fixture
def table_scene() -> SceneState:
    """An apple and a cup on a counter next to a plate, no obstacles."""
    return SceneState(
        objects=(
            SceneObject("apple_1", Point3D(0.35, 0.0, 0.03), 0.02),
            SceneObject("cup_1", Point3D(0.45, 0.10, 0.03), 0.02),
        ),
        regions=(
            Region("counter_1", Point3D(0.30, -0.05, 0.0), Point3D(0.50, 0.15, 0.1)),
            Region("plate_1", Point3D(0.50, -0.25, 0.0), Point3D(0.66, -0.10, 0.1)),
        ),
    )


def scenario_path(name: str) -> str:
    return os.path.join(SCENARIOS, f"{name}.json")
