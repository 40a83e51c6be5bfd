"""OpenAI-compatible chat backend rendered through ``{{field}}`` prompt templates."""

from __future__ import annotations

import logging
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping

from .grammar import KEYS, parse_result
from .messages import (
    AgentKind,
    AgentRequest,
    AgentResponse,
    ConfigError,
    MalformedResponse,
    TransportError,
)

logger = logging.getLogger(__name__)

DEFAULT_TEMPLATES = Path(__file__).with_name("templates")
PLACEHOLDER = re.compile(r"\{\{\s*([a-z_]+)\s*\}\}")
FORMAT_REMINDER = (
    "Your previous reply could not be parsed. Answer again using exactly one "
    "line per key, in the form KEY: value, with the keys: {keys}."
)

Transport = Callable[[str, Mapping[str, str], Mapping[str, Any]], Mapping[str, Any]]


@dataclass(frozen=True)
class RemoteConfig:
    endpoint: str
    api_key: str
    model: str = "gpt-4-0613"
    max_parse_retries: int = 2
    max_transport_attempts: int = 4
    backoff: float = 1.0
    timeout: float = 60.0

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None, **overrides) -> RemoteConfig:
        env = os.environ if env is None else env
        endpoint = env.get("RAH_LLM_ENDPOINT", "")
        key = env.get("RAH_LLM_API_KEY", "")
        if not endpoint or not key:
            raise ConfigError("RAH_LLM_ENDPOINT and RAH_LLM_API_KEY must be set for the remote backend")
        return cls(endpoint=endpoint, api_key=key, model=env.get("RAH_LLM_MODEL", "gpt-4-0613"), **overrides)


def load_templates(directory: str | Path | None = None) -> dict[AgentKind, str]:
    directory = Path(directory) if directory else DEFAULT_TEMPLATES
    out = {}
    for kind in AgentKind:
        path = directory / f"{kind.value}.txt"
        if path.exists():
            out[kind] = path.read_text(encoding="utf-8")
    return out


def render(template: str, fields: Mapping[str, str]) -> str:
    names = set(PLACEHOLDER.findall(template))
    if not names:
        raise ConfigError("template declares no placeholders")
    missing = sorted(n for n in names if n not in fields)
    if missing:
        raise ConfigError(f"template placeholders without values: {missing}")
    return PLACEHOLDER.sub(lambda m: str(fields[m.group(1)]), template)


def _entries_text(entries) -> str:
    if not entries:
        return "none"
    return "; ".join(
        (f"({e['polarity']}) " if "polarity" in e else "") + f"{e['statement']} [{', '.join(e['facets'])}]"
        for e in entries
    )


def template_fields(request: AgentRequest) -> dict[str, str]:
    """Flatten a structured payload into the string fields templates may reference."""
    p = request.payload
    fields: dict[str, str] = {}
    item = p.get("item")
    if item is not None:
        fields["item_id"] = item.get("id", "")
        fields["title"] = item.get("title", item.get("description", ""))
        fields["domain"] = item.get("domain", "")
        fields["description"] = item.get("description", "") or "none"
        fields["attributes"] = ", ".join(item.get("attributes", item.get("tags", []))) or "none"
    personality = p.get("personality")
    if personality is not None:
        fields["likes"] = _entries_text(personality.get("likes"))
        fields["dislikes"] = _entries_text(personality.get("dislikes"))
    if "action" in p:
        fields["action"] = p["action"]
        fields["rating"] = "unknown" if p.get("rating") is None else str(p["rating"])
        fields["comment"] = p.get("comment") or "none"
    if "critique" in p:
        c = p["critique"]
        fields["critique"] = (
            "none"
            if not c
            else "reasons: " + "; ".join(c["reasons"]) + ". suggestions: " + "; ".join(c["suggestions"])
        )
    if "outcome" in p:
        o = p["outcome"]
        fields["predicted"] = o["predicted"]
        fields["simulated_comment"] = o.get("comment", "")
        fields["actual"] = p["actual"]
    if "existing" in p:
        fields["existing"] = _entries_text(p["existing"])
        fields["fresh"] = _entries_text(p["fresh"])
    return fields


def httpx_transport(timeout: float = 60.0) -> Transport:
    import httpx

    def post(url, headers, body):
        try:
            resp = httpx.post(url, headers=dict(headers), json=dict(body), timeout=timeout)
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransportError(f"HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise ConfigError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        return resp.json()

    return post


class RemoteBackend:
    def __init__(
        self,
        config: RemoteConfig,
        templates: Mapping[AgentKind, str] | None = None,
        transport: Transport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self.templates = dict(templates) if templates is not None else load_templates()
        self.transport = transport or httpx_transport(config.timeout)
        self.sleep = sleep
        self.identity = f"remote:{config.endpoint}:{config.model}"

    def _post(self, messages: list[dict[str, str]], request: AgentRequest) -> str:
        body = {
            "model": self.config.model,
            "messages": messages,
            "temperature": request.decode.temperature,
            "max_tokens": request.decode.max_tokens,
        }
        headers = {"Authorization": f"Bearer {self.config.api_key}", "Content-Type": "application/json"}
        url = self.config.endpoint.rstrip("/")
        if not url.endswith("/chat/completions"):
            url += "/chat/completions"
        delay = self.config.backoff
        for attempt in range(1, self.config.max_transport_attempts + 1):
            try:
                data = self.transport(url, headers, body)
                return data["choices"][0]["message"]["content"]
            except TransportError as exc:
                if attempt == self.config.max_transport_attempts:
                    raise
                logger.warning("transport failure (%s), retrying in %.1fs", exc, delay)
                self.sleep(delay)
                delay *= 2
            except (KeyError, IndexError, TypeError) as exc:
                raise MalformedResponse(f"unexpected completion envelope: {exc}") from exc
        raise AssertionError("unreachable")

    def complete(self, request: AgentRequest) -> AgentResponse:
        if not self.config.endpoint or not self.config.api_key:
            raise ConfigError("remote backend needs an endpoint and an API key")
        template = self.templates.get(request.kind)
        if template is None:
            raise ConfigError(f"no template for {request.kind.value}")
        prompt = render(template, template_fields(request))
        messages = [{"role": "user", "content": prompt}]
        reminder = FORMAT_REMINDER.format(keys=", ".join(KEYS[request.kind]))
        last_error: MalformedResponse | None = None
        for retry in range(self.config.max_parse_retries + 1):
            text = self._post(messages, request)
            try:
                result = parse_result(request.kind, text)
            except MalformedResponse as exc:
                last_error = exc
                messages = messages + [
                    {"role": "assistant", "content": text},
                    {"role": "user", "content": reminder},
                ]
                continue
            return AgentResponse(request.kind, result, text, "remote", retry_count=retry)
        raise MalformedResponse(
            f"{request.kind.value}: unparseable after {self.config.max_parse_retries} retries: {last_error}"
        )
