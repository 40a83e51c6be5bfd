from .cache import CachedBackend, cache_key
from .messages import (
    AgentKind,
    AgentRequest,
    AgentResponse,
    Backend,
    ConfigError,
    Decode,
    GatewayError,
    LookupFailure,
    MalformedResponse,
    TransportError,
)
from .oracle import OracleBackend, SyntheticUser, SyntheticWorld, act_score
from .remote import RemoteBackend, RemoteConfig, load_templates, render


def complete_oracle(request: AgentRequest, world: SyntheticWorld) -> AgentResponse:
    return OracleBackend(world).complete(request)


def complete_remote(request: AgentRequest, config: RemoteConfig, **kwargs) -> AgentResponse:
    return RemoteBackend(config, **kwargs).complete(request)


__all__ = [
    "AgentKind",
    "AgentRequest",
    "AgentResponse",
    "Backend",
    "CachedBackend",
    "ConfigError",
    "Decode",
    "GatewayError",
    "LookupFailure",
    "MalformedResponse",
    "OracleBackend",
    "RemoteBackend",
    "RemoteConfig",
    "SyntheticUser",
    "SyntheticWorld",
    "TransportError",
    "act_score",
    "cache_key",
    "complete_oracle",
    "complete_remote",
    "load_templates",
    "render",
]
