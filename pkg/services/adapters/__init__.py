from services.adapters.base import AdapterConfig, AdapterKind, AdapterResponse, AdapterRole, BaseModelAdapter
from services.adapters.client import ModelSuite, build_adapter, build_suite, call_adapter, make_fixture_suite
from services.adapters.fixtures import FaultInjection, FixtureNoise
from services.adapters.remote import RemoteModelAdapter

__all__ = [
    "AdapterConfig",
    "AdapterKind",
    "AdapterResponse",
    "AdapterRole",
    "BaseModelAdapter",
    "ModelSuite",
    "build_adapter",
    "build_suite",
    "call_adapter",
    "make_fixture_suite",
    "FaultInjection",
    "FixtureNoise",
    "RemoteModelAdapter",
]
