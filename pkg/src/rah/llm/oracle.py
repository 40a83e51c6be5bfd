"""Deterministic rule-based stand-in for the LLM, defined over a synthetic world.

Rules:

* perceive: description is the title, attributes are the ground-truth tags
* learn: the interaction's polarity receives one entry per attribute not flagged
  by the incoming critique; the opposite polarity receives nothing
* act: score = |attrs & like facets| - |attrs & dislike facets|; Like iff
  score > 0, ties go to Dislike
* critic: names the facets that pushed the score to the wrong sign
* reflect: union-merge duplicates per polarity; facets held under both
  polarities are split out of their entries, dropped, and turned into queries
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from ..core import Action, Item, facet_statement
from .grammar import format_result
from .messages import AgentKind, AgentRequest, AgentResponse, LookupFailure, stable_digest

WORLD_FORMAT = "rah-world"
WORLD_VERSION = 1


@dataclass(frozen=True)
class SyntheticUser:
    liked_tags: frozenset[str]
    disliked_tags: frozenset[str]
    noise_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "liked_tags", frozenset(self.liked_tags))
        object.__setattr__(self, "disliked_tags", frozenset(self.disliked_tags))
        if self.liked_tags & self.disliked_tags:
            raise ValueError("liked and disliked tags overlap")
        if not 0.0 <= self.noise_rate < 1.0:
            raise ValueError("noise_rate must lie in [0, 1)")

    def true_action(self, tags: Iterable[str]) -> Action:
        tags = set(tags)
        pos = len(tags & self.liked_tags)
        neg = len(tags & self.disliked_tags)
        return Action.LIKE if pos > neg else Action.DISLIKE

    def answer(self, facet: str) -> Action | None:
        if facet in self.liked_tags:
            return Action.LIKE
        if facet in self.disliked_tags:
            return Action.DISLIKE
        return None


@dataclass(frozen=True)
class SyntheticWorld:
    catalog: Mapping[str, Item]
    users: Mapping[str, SyntheticUser]
    seed: int = 0
    _digest: list = field(default_factory=list, compare=False, repr=False)

    def item(self, item_id: str) -> Item:
        try:
            return self.catalog[item_id]
        except KeyError:
            raise LookupFailure(f"unknown item {item_id!r}") from None

    def user(self, user_id: str) -> SyntheticUser:
        try:
            return self.users[user_id]
        except KeyError:
            raise LookupFailure(f"unknown user {user_id!r}") from None

    def human_action(self, user_id: str, item_id: str) -> Action:
        """Synthetic human reaction; noise flips are seeded per (world, user, item)."""
        user = self.user(user_id)
        action = user.true_action(self.item(item_id).tags)
        if user.noise_rate > 0:
            rng = random.Random(f"{self.seed}:{user_id}:{item_id}")
            if rng.random() < user.noise_rate:
                action = action.flipped()
        return action

    def domains(self) -> list[str]:
        return sorted({it.domain for it in self.catalog.values()})

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": WORLD_FORMAT,
            "version": WORLD_VERSION,
            "seed": self.seed,
            "items": [self.catalog[k].to_dict() for k in sorted(self.catalog)],
            "users": {
                uid: {
                    "liked_tags": sorted(u.liked_tags),
                    "disliked_tags": sorted(u.disliked_tags),
                    "noise_rate": u.noise_rate,
                }
                for uid, u in sorted(self.users.items())
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SyntheticWorld:
        if data.get("format") != WORLD_FORMAT or data.get("version") != WORLD_VERSION:
            raise ValueError(
                f"unsupported world encoding {data.get('format')!r} v{data.get('version')!r}"
            )
        items = {d["id"]: Item.from_dict(d) for d in data["items"]}
        users = {
            uid: SyntheticUser(frozenset(u["liked_tags"]), frozenset(u["disliked_tags"]), u["noise_rate"])
            for uid, u in data["users"].items()
        }
        return cls(items, users, int(data["seed"]))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def loads(cls, text: str) -> SyntheticWorld:
        return cls.from_dict(json.loads(text))

    def digest(self) -> str:
        if not self._digest:
            self._digest.append(stable_digest(self.to_dict())[:16])
        return self._digest[0]


def _snapshot_facets(snapshot: Mapping[str, Any], key: str) -> set[str]:
    out: set[str] = set()
    for entry in snapshot.get(key, ()):
        out.update(entry["facets"])
    return out


def act_score(attributes: Iterable[str], likes: Iterable[str], dislikes: Iterable[str]) -> int:
    attrs = set(attributes)
    return len(attrs & set(likes)) - len(attrs & set(dislikes))


def _perceive(payload, world: SyntheticWorld) -> dict[str, Any]:
    item = world.item(payload["item"]["id"])
    return {"description": item.title, "attributes": sorted(item.tags)}


def _learn(payload) -> dict[str, Any]:
    attrs = sorted(payload["item"]["attributes"])
    flagged = set((payload.get("critique") or {}).get("flagged", ()))
    polarity = Action(payload["action"])
    keep = [a for a in attrs if a not in flagged]
    entries = [{"statement": facet_statement(polarity, [a]), "facets": [a]} for a in keep]
    listing = ", ".join(attrs) or "nothing"
    return {
        "why_like": f"some people may like it for: {listing}",
        "why_dislike": f"some people may dislike it for: {listing}",
        "likes": entries if polarity is Action.LIKE else [],
        "dislikes": entries if polarity is Action.DISLIKE else [],
    }


def _act(payload) -> dict[str, Any]:
    attrs = set(payload["item"]["attributes"])
    likes = _snapshot_facets(payload["personality"], "likes")
    dislikes = _snapshot_facets(payload["personality"], "dislikes")
    pos = sorted(attrs & likes)
    neg = sorted(attrs & dislikes)
    score = len(pos) - len(neg)
    predicted = Action.LIKE if score > 0 else Action.DISLIKE
    return {
        "reasons": f"matches likes: {', '.join(pos) or 'none'}; matches dislikes: {', '.join(neg) or 'none'}",
        "perception": f"score {score:+d}",
        "comment": "I would enjoy this." if score > 0 else "Not for me.",
        "predicted": predicted.value,
        "confident": score != 0,
    }


def _critic(payload) -> dict[str, Any]:
    attrs = set(payload["item"]["attributes"])
    predicted = Action(payload["outcome"]["predicted"])
    actual = Action(payload["actual"])
    if predicted is actual:
        return {"reasons": [], "suggestions": [], "flagged": []}
    if predicted is Action.LIKE:
        drivers = sorted(attrs & _snapshot_facets(payload["personality"], "likes"))
        side = "like"
    else:
        drivers = sorted(attrs & _snapshot_facets(payload["personality"], "dislikes"))
        side = "dislike"
    if drivers:
        reasons = [f"{side} facet {d} drove the prediction to {predicted.value}" for d in drivers]
        suggestions = [f"remove or flip {d}" for d in drivers]
    else:
        reasons = [f"no learned facet supports {actual.value} for attributes {', '.join(sorted(attrs))}"]
        suggestions = [f"learn {actual.value} facets from the item attributes"]
    return {"reasons": reasons, "suggestions": suggestions, "flagged": drivers}


def reflect_merge(entries: list[Mapping[str, Any]]) -> dict[str, Any]:
    """Oracle reflection over a combined entry list (existing then fresh)."""

    def dedupe(items):
        order: list[tuple[str, str]] = []
        merged: dict[tuple[str, str], dict[str, Any]] = {}
        for e in items:
            key = (e["polarity"], e["statement"])
            if key in merged:
                merged[key]["facets"] = sorted(set(merged[key]["facets"]) | set(e["facets"]))
            else:
                merged[key] = {"polarity": e["polarity"], "statement": e["statement"], "facets": sorted(e["facets"])}
                order.append(key)
        return [merged[k] for k in order]

    entries = dedupe(entries)
    likes = {f for e in entries if e["polarity"] == Action.LIKE.value for f in e["facets"]}
    dislikes = {f for e in entries if e["polarity"] == Action.DISLIKE.value for f in e["facets"]}
    conflicts = likes & dislikes
    resolved = []
    for e in entries:
        if not conflicts & set(e["facets"]):
            resolved.append(e)
            continue
        pol = Action(e["polarity"])
        for f in e["facets"]:
            if f not in conflicts:
                resolved.append({"polarity": e["polarity"], "statement": facet_statement(pol, [f]), "facets": [f]})
    resolved = dedupe(resolved)
    return {
        "likes": [{"statement": e["statement"], "facets": e["facets"]} for e in resolved if e["polarity"] == Action.LIKE.value],
        "dislikes": [{"statement": e["statement"], "facets": e["facets"]} for e in resolved if e["polarity"] == Action.DISLIKE.value],
        "queries": [f"Do you like or dislike {f}?" for f in sorted(conflicts)],
    }


def _reflect(payload) -> dict[str, Any]:
    return reflect_merge(list(payload["existing"]) + list(payload["fresh"]))


class OracleBackend:
    """Pure function of (request, world); safe to share across threads."""

    def __init__(self, world: SyntheticWorld):
        self.world = world
        self.identity = f"oracle:{world.digest()}"

    def complete(self, request: AgentRequest) -> AgentResponse:
        kind = request.kind
        payload = request.payload
        if kind is AgentKind.PERCEIVE:
            result = _perceive(payload, self.world)
        elif kind is AgentKind.LEARN:
            result = _learn(payload)
        elif kind is AgentKind.ACT:
            result = _act(payload)
        elif kind is AgentKind.CRITIC:
            result = _critic(payload)
        else:
            result = _reflect(payload)
        return AgentResponse(kind, result, format_result(kind, result), "oracle")
