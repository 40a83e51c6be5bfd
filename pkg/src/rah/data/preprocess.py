"""Corpus filters and counts."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ..core import Interaction


def kcore_filter(interactions: Iterable[Interaction], k: int = 5) -> list[Interaction]:
    """Drop users and items with fewer than ``k`` interactions until nothing changes.

    Peels low-degree nodes with a work queue, so each interaction is removed at most once.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    rows = list(interactions)
    by_user: dict[str, set[int]] = defaultdict(set)
    by_item: dict[str, set[int]] = defaultdict(set)
    for idx, x in enumerate(rows):
        by_user[x.user].add(idx)
        by_item[x.item].add(idx)
    alive = [True] * len(rows)
    queue = [("u", u) for u, s in by_user.items() if len(s) < k]
    queue += [("i", i) for i, s in by_item.items() if len(s) < k]
    while queue:
        side, key = queue.pop()
        bucket = by_user if side == "u" else by_item
        doomed = bucket.pop(key, None)
        if doomed is None:
            continue
        for idx in doomed:
            if not alive[idx]:
                continue
            alive[idx] = False
            x = rows[idx]
            other, okey, oside = (by_item, x.item, "i") if side == "u" else (by_user, x.user, "u")
            if okey in other:
                other[okey].discard(idx)
                if len(other[okey]) < k:
                    queue.append((oside, okey))
    return [x for x, keep in zip(rows, alive) if keep]


def retain_cross_domain(interactions: Iterable[Interaction], item_domain: Mapping[str, str]) -> list[Interaction]:
    rows = list(interactions)
    spans: dict[str, set[str]] = defaultdict(set)
    for x in rows:
        spans[x.user].add(item_domain[x.item])
    return [x for x in rows if len(spans[x.user]) >= 2]


@dataclass(frozen=True)
class DomainCounts:
    users: int = 0
    items: int = 0
    interactions: int = 0


@dataclass(frozen=True)
class CorpusStats:
    per_domain: Mapping[str, DomainCounts] = field(default_factory=dict)

    @property
    def total(self) -> DomainCounts:
        return DomainCounts(
            sum(c.users for c in self.per_domain.values()),
            sum(c.items for c in self.per_domain.values()),
            sum(c.interactions for c in self.per_domain.values()),
        )

    def rows(self) -> list[tuple[str, int, int, int]]:
        return [(d, c.users, c.items, c.interactions) for d, c in sorted(self.per_domain.items())]


def stats(interactions: Iterable[Interaction], item_domain: Mapping[str, str]) -> CorpusStats:
    users: dict[str, set[str]] = defaultdict(set)
    items: dict[str, set[str]] = defaultdict(set)
    counts: Counter[str] = Counter()
    for x in interactions:
        d = item_domain[x.item]
        users[d].add(x.user)
        items[d].add(x.item)
        counts[d] += 1
    return CorpusStats({d: DomainCounts(len(users[d]), len(items[d]), counts[d]) for d in sorted(counts)})
