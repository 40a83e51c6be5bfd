"""The five assistant agents as typed calls over a gateway backend.

Agents never touch I/O themselves; everything goes through ``backend.complete``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .core import (
    Action,
    Interaction,
    Item,
    Personality,
    TraitEntry,
    facet_statement,
    is_reflected,
)
from .llm.messages import AgentKind, AgentRequest, Backend, Decode, GatewayError
from .llm.oracle import reflect_merge


class AgentError(GatewayError):
    """An agent received a structurally valid but unusable result."""


@dataclass(frozen=True)
class PerceivedItem:
    item_id: str
    description: str
    attributes: frozenset[str]
    title: str = ""
    domain: str = ""

    def payload(self) -> dict[str, Any]:
        return {
            "id": self.item_id,
            "title": self.title,
            "domain": self.domain,
            "description": self.description,
            "attributes": sorted(self.attributes),
        }


@dataclass(frozen=True)
class CandidateTraits:
    new_likes: tuple[TraitEntry, ...] = ()
    new_dislikes: tuple[TraitEntry, ...] = ()
    why_like: str = ""
    why_dislike: str = ""

    @property
    def entries(self) -> tuple[TraitEntry, ...]:
        return self.new_likes + self.new_dislikes

    def facets(self, polarity: Action) -> frozenset[str]:
        pool = self.new_likes if polarity is Action.LIKE else self.new_dislikes
        return frozenset(f for e in pool for f in e.facets)


EMPTY_TRAITS = CandidateTraits()


@dataclass(frozen=True)
class ActOutcome:
    hypothesized_reasons: str
    perception_analysis: str
    simulated_comment: str
    predicted: Action
    confident: bool = True

    def __post_init__(self):
        for name in ("hypothesized_reasons", "perception_analysis", "simulated_comment"):
            if not getattr(self, name):
                raise AgentError(f"act chain stage {name} is empty")

    def payload(self) -> dict[str, Any]:
        return {
            "reasons": self.hypothesized_reasons,
            "perception": self.perception_analysis,
            "comment": self.simulated_comment,
            "predicted": self.predicted.value,
        }


@dataclass(frozen=True)
class Verdict:
    passed: bool
    mismatch: tuple[Action, Action] | None = None
    reasons: tuple[str, ...] = ()
    suggestions: tuple[str, ...] = ()
    flagged: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.passed != (self.mismatch is None):
            raise ValueError("pass must hold exactly when there is no mismatch")
        if not self.passed and not self.reasons:
            raise ValueError("a failing verdict needs reasons")

    def payload(self) -> dict[str, Any]:
        return {
            "reasons": list(self.reasons),
            "suggestions": list(self.suggestions),
            "flagged": sorted(self.flagged),
        }


@dataclass(frozen=True)
class ReflectResult:
    merged: Personality
    duplicates_removed: int = 0
    conflicts_resolved: int = 0
    user_queries: tuple[str, ...] = ()
    conflicting_facets: tuple[str, ...] = field(default=())


def personality_snapshot(personality: Personality | Iterable[TraitEntry]) -> dict[str, Any]:
    entries = personality.entries if isinstance(personality, Personality) else tuple(personality)
    return {
        "likes": [
            {"statement": e.statement, "facets": sorted(e.facets)} for e in entries if e.polarity is Action.LIKE
        ],
        "dislikes": [
            {"statement": e.statement, "facets": sorted(e.facets)} for e in entries if e.polarity is Action.DISLIKE
        ],
    }


def _entry_payload(entry: TraitEntry) -> dict[str, Any]:
    return {"polarity": entry.polarity.value, "statement": entry.statement, "facets": sorted(entry.facets)}


def perceive(item: Item, backend: Backend, decode: Decode | None = None) -> PerceivedItem:
    if not item.title:
        raise AgentError(f"item {item.id} has no title")
    request = AgentRequest(AgentKind.PERCEIVE, {"item": item.to_dict()}, decode or Decode())
    result = backend.complete(request).result
    attributes = frozenset(result["attributes"])
    if not attributes:
        raise AgentError(f"perceive produced no attributes for item {item.id}")
    return PerceivedItem(item.id, result["description"], attributes, item.title, item.domain)


def _traits(raw: Iterable[Mapping[str, Any]], polarity: Action, provenance: frozenset[str]):
    out = []
    for e in raw:
        facets = frozenset(e["facets"])
        if not facets:
            continue
        out.append(TraitEntry(polarity, e.get("statement") or facet_statement(polarity, facets), facets, provenance))
    return tuple(out)


def learn(
    perceived: PerceivedItem,
    interaction: Interaction,
    personality: Personality,
    critique: Verdict | None,
    backend: Backend,
    decode: Decode | None = None,
) -> CandidateTraits:
    if critique is not None and critique.passed:
        raise ValueError("a critique handed to learn must be a failing verdict")
    payload = {
        "item": perceived.payload(),
        "action": interaction.action.value,
        "rating": interaction.rating,
        "comment": interaction.comment,
        "personality": personality_snapshot(personality),
        "critique": None if critique is None else critique.payload(),
    }
    result = backend.complete(AgentRequest(AgentKind.LEARN, payload, decode or Decode())).result
    provenance = frozenset({interaction.id})
    return CandidateTraits(
        new_likes=_traits(result["likes"], Action.LIKE, provenance),
        new_dislikes=_traits(result["dislikes"], Action.DISLIKE, provenance),
        why_like=result["why_like"],
        why_dislike=result["why_dislike"],
    )


def act(
    perceived: PerceivedItem,
    personality: Personality | Iterable[TraitEntry],
    backend: Backend,
    decode: Decode | None = None,
) -> ActOutcome:
    payload = {"item": perceived.payload(), "personality": personality_snapshot(personality)}
    r = backend.complete(AgentRequest(AgentKind.ACT, payload, decode or Decode())).result
    return ActOutcome(
        hypothesized_reasons=r["reasons"],
        perception_analysis=r["perception"],
        simulated_comment=r["comment"],
        predicted=Action(r["predicted"]),
        confident=bool(r.get("confident", True)),
    )


def critic(
    outcome: ActOutcome,
    actual: Action,
    perceived: PerceivedItem,
    personality: Personality | Iterable[TraitEntry],
    backend: Backend,
    decode: Decode | None = None,
) -> Verdict:
    """Judge a prediction against ground truth; only mismatches reach the backend."""
    if outcome.predicted is actual:
        return Verdict(passed=True)
    payload = {
        "item": perceived.payload(),
        "personality": personality_snapshot(personality),
        "outcome": outcome.payload(),
        "actual": actual.value,
    }
    r = backend.complete(AgentRequest(AgentKind.CRITIC, payload, decode or Decode())).result
    reasons = tuple(r["reasons"]) or (f"predicted {outcome.predicted.value} but the user chose {actual.value}",)
    return Verdict(
        passed=False,
        mismatch=(outcome.predicted, actual),
        reasons=reasons,
        suggestions=tuple(r["suggestions"]),
        flagged=frozenset(r["flagged"]),
    )


def _rebuild(output, polarity: Action, inputs: list[TraitEntry]) -> list[TraitEntry]:
    """Reattach provenance and creation stamps to backend-produced entries."""
    same_side = [e for e in inputs if e.polarity is polarity]
    rebuilt = []
    for raw in output:
        facets = frozenset(raw["facets"])
        statement = raw.get("statement") or facet_statement(polarity, facets)
        sources = [e for e in same_side if e.statement == statement]
        if not sources:
            sources = [e for e in same_side if e.facets & facets] or same_side or inputs
        provenance = frozenset().union(*(e.provenance for e in sources))
        created = min(e.created_at for e in sources)
        rebuilt.append(TraitEntry(polarity, statement, facets, provenance, created))
    return rebuilt


def reflect(
    existing: Personality,
    fresh: CandidateTraits | Iterable[TraitEntry],
    backend: Backend,
    decode: Decode | None = None,
) -> ReflectResult:
    fresh_entries = fresh.entries if isinstance(fresh, CandidateTraits) else tuple(fresh)
    if not fresh_entries and is_reflected(existing):
        return ReflectResult(existing)
    stamped = existing.appended(fresh_entries).entries[len(existing.entries):]
    inputs = list(existing.entries) + list(stamped)
    payload = {
        "existing": [_entry_payload(e) for e in existing.entries],
        "fresh": [_entry_payload(e) for e in stamped],
    }
    r = backend.complete(AgentRequest(AgentKind.REFLECT, payload, decode or Decode())).result
    entries = _rebuild(r["likes"], Action.LIKE, inputs) + _rebuild(r["dislikes"], Action.DISLIKE, inputs)
    entries.sort(key=lambda e: (e.created_at, e.polarity.value, e.statement))
    queries = list(r["queries"])
    candidate = Personality(existing.user, tuple(entries))
    if not is_reflected(candidate):
        # Backend left duplicates or conflicts behind; apply the deterministic merge on top.
        guard = reflect_merge([_entry_payload(e) for e in candidate.entries])
        entries = _rebuild(guard["likes"], Action.LIKE, list(candidate.entries)) + _rebuild(
            guard["dislikes"], Action.DISLIKE, list(candidate.entries)
        )
        entries.sort(key=lambda e: (e.created_at, e.polarity.value, e.statement))
        queries += [q for q in guard["queries"] if q not in queries]
        candidate = Personality(existing.user, tuple(entries))
    keys = [e.key for e in inputs]
    in_likes = {f for e in inputs if e.polarity is Action.LIKE for f in e.facets}
    in_dislikes = {f for e in inputs if e.polarity is Action.DISLIKE for f in e.facets}
    conflicts = tuple(sorted(in_likes & in_dislikes))
    return ReflectResult(
        merged=candidate,
        duplicates_removed=len(keys) - len(set(keys)),
        conflicts_resolved=len(conflicts),
        user_queries=tuple(queries),
        conflicting_facets=conflicts,
    )
