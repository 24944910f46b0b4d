from pydantic import BaseModel, ConfigDict, Field

from config.settings import (
    OPT_COST_TOL,
    OPT_MAX_DISPLACEMENT,
    OPT_MAX_ITERS,
    OPT_PHI,
    OPT_SHRINK_FACTOR,
    OPT_STEP_SIZE,
    OPT_W_COLL,
    OPT_W_SMOOTH,
)


class OptParams(BaseModel):
    """Trajectory refinement parameters."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    w_smooth: float = Field(OPT_W_SMOOTH, ge=0)
    w_coll: float = Field(OPT_W_COLL, ge=0)
    phi: float = Field(OPT_PHI, gt=0, description="collision softening (m)")
    step_size: float = Field(OPT_STEP_SIZE, gt=0, description="largest waypoint move of the first trial step (m)")
    max_iters: int = Field(OPT_MAX_ITERS, ge=1)
    cost_tol: float = Field(OPT_COST_TOL, ge=0)
    shrink_factor: float = Field(OPT_SHRINK_FACTOR, gt=0, lt=1)
    max_displacement: float = Field(OPT_MAX_DISPLACEMENT, gt=0, description="trust radius around input waypoints (m)")
    armijo: float = Field(1e-4, gt=0, lt=1)
    max_backtracks: int = Field(40, ge=1)
