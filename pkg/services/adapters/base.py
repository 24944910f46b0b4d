from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from config.settings import ADAPTER_API_TOKEN, ADAPTER_MAX_IN_FLIGHT, ADAPTER_RETRIES, ADAPTER_TIMEOUT


class AdapterRole(str, Enum):
    PLANNER = "planner"
    GENERATOR = "generator"
    TRACKER = "tracker"
    DEPTH = "depth"
    SELECTOR = "selector"


class AdapterKind(str, Enum):
    FIXTURE = "fixture"
    REMOTE = "remote"


class AdapterConfig(BaseModel):
    """How one model role is served."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: AdapterKind = AdapterKind.FIXTURE
    endpoint: Optional[str] = None
    timeout: float = Field(ADAPTER_TIMEOUT, gt=0, description="seconds per attempt")
    retries: int = Field(ADAPTER_RETRIES, ge=0, le=5)
    seed: int = 0
    api_token: str = Field(ADAPTER_API_TOKEN, repr=False, exclude=True)
    max_in_flight: int = Field(ADAPTER_MAX_IN_FLIGHT, ge=1)

    @model_validator(mode="after")
    def _endpoint_for_remote(self):
        if self.kind == AdapterKind.REMOTE and not self.endpoint:
            raise ValueError("remote adapters require an endpoint")
        return self


@dataclass(frozen=True)
class AdapterResponse:
    """Validated role payload plus call statistics."""
    payload: Dict[str, Any]
    latency: float
    attempt_count: int


class BaseModelAdapter(ABC):
    """Base class for model role adapters."""

    role: AdapterRole

    @abstractmethod
    def invoke(self, payload: Dict[str, Any]) -> AdapterResponse:
        """
        Answer one request.

        Args:
            payload: Request body, already validated against the role's request schema

        Returns:
            AdapterResponse with the raw response body (validated by the caller)
        """
        pass
