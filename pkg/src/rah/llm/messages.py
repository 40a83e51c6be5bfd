"""Typed request/response envelope shared by every backend."""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Protocol


class GatewayError(RuntimeError):
    pass


class ConfigError(GatewayError):
    pass


class MalformedResponse(GatewayError):
    pass


class TransportError(GatewayError):
    """Retryable failure talking to a remote endpoint."""


class LookupFailure(GatewayError, KeyError):
    pass


class AgentKind(enum.Enum):
    PERCEIVE = "perceive"
    LEARN = "learn"
    ACT = "act"
    CRITIC = "critic"
    REFLECT = "reflect"


REQUIRED_PAYLOAD: dict[AgentKind, tuple[str, ...]] = {
    AgentKind.PERCEIVE: ("item",),
    AgentKind.LEARN: ("item", "action", "personality", "critique"),
    AgentKind.ACT: ("item", "personality"),
    AgentKind.CRITIC: ("item", "personality", "outcome", "actual"),
    AgentKind.REFLECT: ("existing", "fresh"),
}


@dataclass(frozen=True)
class Decode:
    temperature: float = 0.0
    max_tokens: int = 512

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        return {"temperature": self.temperature, "max_tokens": self.max_tokens}


@dataclass(frozen=True)
class AgentRequest:
    kind: AgentKind
    payload: Mapping[str, Any]
    decode: Decode = field(default_factory=Decode)

    def __post_init__(self):
        missing = [k for k in REQUIRED_PAYLOAD[self.kind] if k not in self.payload]
        if missing:
            raise ValueError(f"{self.kind.value} payload missing fields: {missing}")

    def canonical(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "payload": self.payload, "decode": self.decode.to_dict()}


@dataclass(frozen=True)
class AgentResponse:
    kind: AgentKind
    result: Mapping[str, Any]
    raw_text: str
    backend: str
    retry_count: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "result": self.result,
            "raw_text": self.raw_text,
            "backend": self.backend,
            "retry_count": self.retry_count,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> AgentResponse:
        return cls(
            kind=AgentKind(data["kind"]),
            result=data["result"],
            raw_text=data["raw_text"],
            backend=data["backend"],
            retry_count=int(data.get("retry_count", 0)),
        )


class Backend(Protocol):
    identity: str

    def complete(self, request: AgentRequest) -> AgentResponse: ...


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=True, separators=(",", ":"))


def stable_digest(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()
