"""
Error taxonomy shared by every pipeline stage.

Each error carries an optional ``failure_mode`` tag (plan, predict, execute,
verify) that the task runner copies into subtask outcomes.
"""
from typing import Any, Iterable, Optional


class PipelineError(Exception):
    """Base class for all pipeline errors."""
    failure_mode: Optional[str] = None


# ---------------------------------------------------------------------
# Geometry / data
# ---------------------------------------------------------------------

class DegenerateVectorError(PipelineError, ValueError):
    """A vector with zero norm was used where a direction is required."""


class InsufficientDataError(PipelineError, ValueError):
    """Not enough samples to evaluate the requested quantity."""


class FrameIndexError(PipelineError, IndexError):
    """Frame position outside the valid range."""


# ---------------------------------------------------------------------
# Model adapters
# ---------------------------------------------------------------------

class SchemaViolationError(PipelineError):
    """A payload crossing an adapter boundary failed schema validation."""
    failure_mode = "predict"

    def __init__(self, message: str, raw: Any = None):
        super().__init__(message)
        self.raw = raw


class AdapterUnavailableError(PipelineError):
    """The adapter timed out or could not be reached after all retries."""
    failure_mode = "predict"


class RemoteError(PipelineError):
    """The remote model endpoint answered with a non-success status."""
    failure_mode = "predict"

    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


# ---------------------------------------------------------------------
# Planning
# ---------------------------------------------------------------------

class GroundingError(PipelineError):
    """Plan identifiers could not be resolved against the scene."""
    failure_mode = "plan"

    def __init__(self, message: str, unresolved: Iterable[str] = ()):
        super().__init__(message)
        self.unresolved = sorted(set(unresolved))


class PlanCycleError(PipelineError):
    """Precondition references are cyclic or point forward in the plan."""
    failure_mode = "plan"


# ---------------------------------------------------------------------
# Dynamics prediction
# ---------------------------------------------------------------------

class HallucinationError(PipelineError):
    """The imagined rollout lost the target object."""
    failure_mode = "predict"


class TrackingError(PipelineError):
    """The target object is not tracked in every rollout frame."""
    failure_mode = "predict"


class DepthGapError(PipelineError):
    """No valid depth near a waypoint pixel."""
    failure_mode = "predict"


class InvalidDepthError(PipelineError, ValueError):
    """Depth must be strictly positive."""
    failure_mode = "predict"


# ---------------------------------------------------------------------
# Optimization / execution
# ---------------------------------------------------------------------

class NoObstacleError(PipelineError):
    """Nearest-neighbour query against an empty obstacle index."""


class NoGraspError(PipelineError):
    """No grasp candidate available for the target object."""
    failure_mode = "execute"


class GraspFailureError(PipelineError):
    """The selected grasp is too far from the object to hold it."""
    failure_mode = "execute"


# ---------------------------------------------------------------------
# Harness
# ---------------------------------------------------------------------

class ScenarioError(PipelineError):
    """Scenario file could not be parsed or failed validation."""

    def __init__(self, message: str, path: Optional[str] = None, context: Optional[str] = None):
        details = message
        if path:
            details = f"{path}: {details}"
        if context:
            details = f"{details} ({context})"
        super().__init__(details)
        self.path = path
        self.context = context


class ReportError(PipelineError):
    """Report files could not be written."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{path}: {message}")
        self.path = path
