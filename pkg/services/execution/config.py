from enum import Enum
from typing import Any, Dict, Tuple

from pydantic import BaseModel, ConfigDict, Field

from config.settings import (
    FIXTURE_LIFT_HEIGHT,
    FIXTURE_PLANNER_CONTEXT,
    FIXTURE_ROLLOUT_FRAMES,
    SIM_APPROACH_HEIGHT,
    SIM_CLEARANCE,
    SIM_GRASP_RADIUS,
    SIM_REPLAN_BUDGET,
    SIM_STEP_LENGTH,
    SIM_VERIFY_TOLERANCE,
)
from services.adapters import AdapterConfig, AdapterRole, FixtureNoise
from services.dynamics.models import RdpParams
from services.keyframes.models import KeyframeParams
from services.optimization.params import OptParams


class Ablation(str, Enum):
    """Component swaps of the ablation study."""
    FDP = "fdp"          # straight line from the object to its placement slot
    PATH = "path"        # final predicted waypoint plus a straight approach
    PARSING = "parsing"  # every frame described, no keyframe filtering


class SimulatorConfig(BaseModel):
    """Kinematic simulator and verify/replan loop settings."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    clearance: float = Field(SIM_CLEARANCE, gt=0, description="collision threshold (m)")
    grasp_radius: float = Field(SIM_GRASP_RADIUS, gt=0, description="max grasp-to-object distance (m)")
    verify_tolerance: float = Field(SIM_VERIFY_TOLERANCE, ge=0, description="region expansion for verification (m)")
    step_length: float = Field(SIM_STEP_LENGTH, gt=0, description="interpolation step (m)")
    replan_budget: int = Field(SIM_REPLAN_BUDGET, ge=0)
    approach_height: float = Field(SIM_APPROACH_HEIGHT, ge=0, description="approach offset of the path ablation (m)")
    stop_on_failure: bool = False


class FixtureConfig(BaseModel):
    """Fixture model behaviour; noise is off by default."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    rollout_frames: int = Field(FIXTURE_ROLLOUT_FRAMES, ge=2)
    lift_height: float = Field(FIXTURE_LIFT_HEIGHT, ge=0)
    planner_context: int = Field(FIXTURE_PLANNER_CONTEXT, ge=2)
    track_jitter_px: float = Field(0.0, ge=0)
    grasp_perturbation: float = Field(0.0, ge=0, le=1)

    def noise(self) -> FixtureNoise:
        return FixtureNoise(track_jitter_px=self.track_jitter_px, grasp_perturbation=self.grasp_perturbation)


class PipelineConfig(BaseModel):
    """Every tunable of one run; echoed verbatim into reports."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    keyframes: KeyframeParams = Field(default_factory=KeyframeParams)
    rdp: RdpParams = Field(default_factory=RdpParams)
    optimizer: OptParams = Field(default_factory=OptParams)
    simulator: SimulatorConfig = Field(default_factory=SimulatorConfig)
    fixtures: FixtureConfig = Field(default_factory=FixtureConfig)
    adapters: Dict[AdapterRole, AdapterConfig] = Field(default_factory=dict)
    ablations: Tuple[Ablation, ...] = ()

    def with_ablations(self, ablations) -> "PipelineConfig":
        ordered = tuple(sorted({Ablation(a) for a in ablations}, key=lambda a: list(Ablation).index(a)))
        return self.model_copy(update={"ablations": ordered})

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")
