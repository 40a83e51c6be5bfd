"""Shared vocabulary: items, feedback, trait entries and personalities."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping

PAPER_DOMAINS = ("movie", "book", "game")

_DOMAIN_RE = re.compile(r"^[a-z][a-z0-9_-]*$")


class ValidationError(ValueError):
    """Raised when a domain value violates its invariants."""


def domain_tag(name: str) -> str:
    """Validate and return a domain token (lowercase, nonempty)."""
    if not isinstance(name, str) or not _DOMAIN_RE.match(name):
        raise ValidationError(f"invalid domain tag {name!r}")
    return name


class Action(enum.Enum):
    LIKE = "like"
    DISLIKE = "dislike"

    @property
    def rank(self) -> int:
        # Like > Dislike
        return 1 if self is Action.LIKE else 0

    def flipped(self) -> Action:
        return Action.DISLIKE if self is Action.LIKE else Action.LIKE

    @classmethod
    def parse(cls, text: str) -> Action:
        value = text.strip().lower()
        for member in cls:
            if member.value == value:
                return member
        raise ValidationError(f"unknown action {text!r}")


class Source(enum.Enum):
    HUMAN = "human"
    ASSISTANT_PROXY = "assistant_proxy"
    OBFUSCATION = "obfuscation"
    RANDOM_BASELINE = "random_baseline"


class SplitName(enum.Enum):
    LEARN = "learn"
    PROXY = "proxy"
    UNSEEN = "unseen"


def action_from_rating(rating: int) -> Action | None:
    """Map a 1-5 star rating to a polarity; 3 stars carries no polarity."""
    if isinstance(rating, bool) or not isinstance(rating, int) or not 1 <= rating <= 5:
        raise ValidationError(f"rating must be an integer in [1, 5], got {rating!r}")
    if rating >= 4:
        return Action.LIKE
    if rating <= 2:
        return Action.DISLIKE
    return None


@dataclass(frozen=True)
class Item:
    id: str
    domain: str
    title: str
    description: str = ""
    tags: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.id:
            raise ValidationError("item id must be nonempty")
        domain_tag(self.domain)
        object.__setattr__(self, "tags", frozenset(self.tags))

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "domain": self.domain,
            "title": self.title,
            "description": self.description,
            "tags": sorted(self.tags),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Item:
        return cls(
            id=data["id"],
            domain=data["domain"],
            title=data["title"],
            description=data.get("description", ""),
            tags=frozenset(data.get("tags", ())),
        )


@dataclass(frozen=True)
class Interaction:
    id: str
    user: str
    item: str
    action: Action
    rating: int | None = None
    comment: str | None = None
    timestamp: int = 0
    source: Source = Source.HUMAN

    def __post_init__(self):
        if self.rating is not None and not 1 <= self.rating <= 5:
            raise ValidationError(f"rating out of range: {self.rating}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "user": self.user,
            "item": self.item,
            "action": self.action.value,
            "rating": self.rating,
            "comment": self.comment,
            "timestamp": self.timestamp,
            "source": self.source.value,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Interaction:
        return cls(
            id=data["id"],
            user=data["user"],
            item=data["item"],
            action=Action(data["action"]),
            rating=data.get("rating"),
            comment=data.get("comment"),
            timestamp=int(data.get("timestamp", 0)),
            source=Source(data.get("source", Source.HUMAN.value)),
        )


@dataclass(frozen=True)
class TraitEntry:
    polarity: Action
    statement: str
    facets: frozenset[str]
    provenance: frozenset[str]
    created_at: int = 0

    def __post_init__(self):
        if not self.statement:
            raise ValidationError("trait statement must be nonempty")
        if not self.provenance:
            raise ValidationError("trait provenance must be nonempty")
        object.__setattr__(self, "facets", frozenset(self.facets))
        object.__setattr__(self, "provenance", frozenset(self.provenance))

    @property
    def key(self) -> tuple[Action, str]:
        return (self.polarity, self.statement)

    def to_dict(self) -> dict[str, Any]:
        return {
            "polarity": self.polarity.value,
            "statement": self.statement,
            "facets": sorted(self.facets),
            "provenance": sorted(self.provenance),
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> TraitEntry:
        return cls(
            polarity=Action(data["polarity"]),
            statement=data["statement"],
            facets=frozenset(data["facets"]),
            provenance=frozenset(data["provenance"]),
            created_at=int(data.get("created_at", 0)),
        )


def facet_statement(polarity: Action, facets: Iterable[str]) -> str:
    verb = "likes" if polarity is Action.LIKE else "dislikes"
    return f"{verb} {', '.join(sorted(facets))}"


@dataclass(frozen=True)
class Personality:
    user: str
    entries: tuple[TraitEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def facets(self, polarity: Action) -> frozenset[str]:
        out: set[str] = set()
        for entry in self.entries:
            if entry.polarity is polarity:
                out |= entry.facets
        return frozenset(out)

    @property
    def like_facets(self) -> frozenset[str]:
        return self.facets(Action.LIKE)

    @property
    def dislike_facets(self) -> frozenset[str]:
        return self.facets(Action.DISLIKE)

    def next_counter(self) -> int:
        return max((e.created_at for e in self.entries), default=-1) + 1

    def appended(self, new: Iterable[TraitEntry]) -> Personality:
        """Append entries verbatim, restamping created_at from this library's counter."""
        counter = self.next_counter()
        extra = []
        for entry in new:
            extra.append(replace(entry, created_at=counter))
            counter += 1
        return Personality(self.user, self.entries + tuple(extra))

    def to_dict(self) -> dict[str, Any]:
        return {"user": self.user, "entries": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Personality:
        return cls(data["user"], tuple(TraitEntry.from_dict(e) for e in data["entries"]))


def has_duplicate_entries(personality: Personality) -> bool:
    keys = [e.key for e in personality.entries]
    return len(keys) != len(set(keys))


def dual_polarity_facets(personality: Personality) -> frozenset[str]:
    return personality.like_facets & personality.dislike_facets


def is_reflected(personality: Personality) -> bool:
    """Post-reflect invariant: no duplicate (polarity, statement), no facet under both polarities."""
    return not has_duplicate_entries(personality) and not dual_polarity_facets(personality)


@dataclass(frozen=True)
class SplitAssignment:
    """Interaction id -> split set, with the owning user recorded per interaction."""

    assignment: Mapping[str, SplitName] = field(default_factory=dict)
    owners: Mapping[str, str] = field(default_factory=dict)

    def members(self, name: SplitName, user: str | None = None) -> list[str]:
        return sorted(
            iid
            for iid, s in self.assignment.items()
            if s is name and (user is None or self.owners.get(iid) == user)
        )

    def sizes(self, user: str) -> dict[SplitName, int]:
        counts = {s: 0 for s in SplitName}
        for iid, s in self.assignment.items():
            if self.owners.get(iid) == user:
                counts[s] += 1
        return counts

    def to_dict(self) -> dict[str, Any]:
        return {
            "assignment": {k: v.value for k, v in sorted(self.assignment.items())},
            "owners": dict(sorted(self.owners.items())),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SplitAssignment:
        return cls(
            {k: SplitName(v) for k, v in data["assignment"].items()},
            dict(data["owners"]),
        )
