import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Mapping, Optional

from config.settings import (
    DEPTH_ENDPOINT,
    GENERATOR_ENDPOINT,
    PLANNER_ENDPOINT,
    SELECTOR_ENDPOINT,
    TRACKER_ENDPOINT,
)
from services.adapters.base import AdapterConfig, AdapterKind, AdapterResponse, AdapterRole, BaseModelAdapter
from services.adapters.fixtures import (
    FaultInjection,
    FixtureDepth,
    FixtureGenerator,
    FixtureNoise,
    FixturePlanner,
    FixtureSelector,
    FixtureTracker,
)
from services.adapters.remote import RemoteModelAdapter
from services.adapters.schemas import validate_request, validate_response

logger = logging.getLogger(__name__)

FIXTURE_CLASSES = {
    AdapterRole.PLANNER: FixturePlanner,
    AdapterRole.GENERATOR: FixtureGenerator,
    AdapterRole.TRACKER: FixtureTracker,
    AdapterRole.DEPTH: FixtureDepth,
    AdapterRole.SELECTOR: FixtureSelector,
}

ENV_ENDPOINTS = {
    AdapterRole.PLANNER: PLANNER_ENDPOINT,
    AdapterRole.GENERATOR: GENERATOR_ENDPOINT,
    AdapterRole.TRACKER: TRACKER_ENDPOINT,
    AdapterRole.DEPTH: DEPTH_ENDPOINT,
    AdapterRole.SELECTOR: SELECTOR_ENDPOINT,
}


def build_adapter(role: AdapterRole, config: AdapterConfig, **kwargs) -> BaseModelAdapter:
    """Instantiate the fixture or remote adapter described by ``config``."""
    if config.kind == AdapterKind.REMOTE:
        return RemoteModelAdapter(role, config, transport=kwargs.get("transport"))
    options = {}
    if role == AdapterRole.GENERATOR and kwargs.get("lift_height") is not None:
        options["lift_height"] = kwargs["lift_height"]
    if role == AdapterRole.PLANNER and kwargs.get("context_budget") is not None:
        options["context_budget"] = kwargs["context_budget"]
    return FIXTURE_CLASSES[role](
        seed=config.seed, faults=kwargs.get("faults", ()), noise=kwargs.get("noise"), **options
    )


def call_adapter(
    role: AdapterRole,
    payload: Dict[str, Any],
    config: Optional[AdapterConfig] = None,
    adapter: Optional[BaseModelAdapter] = None,
) -> AdapterResponse:
    """
    Call one model role with schema checks in both directions.

    Args:
        role: Model role
        payload: Request body
        config: Adapter configuration (used when ``adapter`` is not given)
        adapter: Ready adapter instance

    Returns:
        AdapterResponse whose payload passed the role's response schema

    Raises:
        SchemaViolationError: request or response does not match the schema
        AdapterUnavailableError: adapter timed out after all retries
        RemoteError: remote endpoint answered with a non-success status
    """
    request = validate_request(role, payload)
    adapter = adapter or build_adapter(role, config or AdapterConfig())
    started = time.perf_counter()
    raw = adapter.invoke(request)
    body = validate_response(role, raw.payload)
    latency = raw.latency or (time.perf_counter() - started)
    return AdapterResponse(payload=body, latency=latency, attempt_count=raw.attempt_count)


@dataclass
class ModelSuite:
    """One adapter per model role."""
    adapters: Mapping[AdapterRole, BaseModelAdapter]
    seed: int = 0
    noise: FixtureNoise = field(default_factory=FixtureNoise)

    def call(self, role: AdapterRole, payload: Dict[str, Any]) -> Dict[str, Any]:
        return call_adapter(role, payload, adapter=self.adapters[role]).payload

    def close(self):
        for adapter in self.adapters.values():
            if hasattr(adapter, "close"):
                adapter.close()


def make_fixture_suite(
    seed: int = 0,
    faults: Iterable[FaultInjection] = (),
    noise: Optional[FixtureNoise] = None,
    lift_height: Optional[float] = None,
    context_budget: Optional[int] = None,
) -> ModelSuite:
    """
    Five mutually consistent fixture adapters.

    The generator tracks exactly the objects the planner grounds, and the depth
    fixture covers every tracked pixel.
    """
    return build_suite({}, seed, faults, noise, lift_height, context_budget, use_env=False)


def build_suite(
    configs: Optional[Mapping[AdapterRole, AdapterConfig]] = None,
    seed: int = 0,
    faults: Iterable[FaultInjection] = (),
    noise: Optional[FixtureNoise] = None,
    lift_height: Optional[float] = None,
    context_budget: Optional[int] = None,
    use_env: bool = True,
) -> ModelSuite:
    """
    Suite from explicit configs, falling back to D2T_*_ENDPOINT variables, then fixtures.

    Fixture adapters always take ``seed`` so that each trial draws its own noise.
    """
    configs = dict(configs or {})
    faults = tuple(faults)
    noise = noise or FixtureNoise()
    adapters = {}
    for role in AdapterRole:
        config = configs.get(role)
        if config is None and use_env and ENV_ENDPOINTS[role]:
            config = AdapterConfig(kind=AdapterKind.REMOTE, endpoint=ENV_ENDPOINTS[role], seed=seed)
        config = config or AdapterConfig(seed=seed)
        if config.kind == AdapterKind.FIXTURE and config.seed != seed:
            config = config.model_copy(update={"seed": seed})
        adapters[role] = build_adapter(
            role, config, faults=faults, noise=noise, lift_height=lift_height, context_budget=context_budget
        )
        logger.debug(f"Adapter {role.value}: {config.kind.value}")
    return ModelSuite(adapters=adapters, seed=seed, noise=noise)
