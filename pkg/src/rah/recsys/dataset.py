"""Indexed training data for the recommenders."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..core import Action, Interaction, Item


@dataclass(frozen=True)
class Universe:
    """Fixed user and item index maps, shared by every arm of a comparison."""

    users: tuple[str, ...]
    items: tuple[str, ...]
    item_domain: tuple[str, ...]

    @classmethod
    def build(cls, users: Iterable[str], catalog: Mapping[str, Item]) -> Universe:
        items = tuple(sorted(catalog))
        return cls(tuple(sorted(set(users))), items, tuple(catalog[i].domain for i in items))

    @property
    def domains(self) -> list[str]:
        return sorted(set(self.item_domain))

    def user_index(self) -> dict[str, int]:
        return {u: k for k, u in enumerate(self.users)}

    def item_index(self) -> dict[str, int]:
        return {i: k for k, i in enumerate(self.items)}

    def domain_mask(self, domain: str | None) -> np.ndarray:
        dom = np.asarray(self.item_domain)
        return np.ones(len(self.items), bool) if domain is None else dom == domain

    def domain_codes(self) -> np.ndarray:
        lookup = {d: k for k, d in enumerate(self.domains)}
        return np.array([lookup[d] for d in self.item_domain], dtype=np.int64)


@dataclass(frozen=True)
class RecDataset:
    universe: Universe
    users: np.ndarray
    items: np.ndarray
    labels: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        n = len(self.users)
        if not (len(self.items) == len(self.labels) == len(self.weights) == n):
            raise ValueError("dataset columns differ in length")
        if n and (self.weights <= 0).any():
            raise ValueError("example weights must be positive")
        if n and not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")

    @property
    def n_users(self) -> int:
        return len(self.universe.users)

    @property
    def n_items(self) -> int:
        return len(self.universe.items)

    def __len__(self) -> int:
        return len(self.users)

    @classmethod
    def build(
        cls,
        universe: Universe,
        interactions: Sequence[Interaction],
        item_weights: Mapping[str, float] | None = None,
    ) -> RecDataset:
        """Label 1 for Like, 0 for Dislike; ``item_weights`` multiplies example weights."""
        uidx, iidx = universe.user_index(), universe.item_index()
        rows = sorted(interactions, key=lambda x: (x.user, x.item, x.timestamp, x.id))
        users = np.fromiter((uidx[x.user] for x in rows), dtype=np.int64, count=len(rows))
        items = np.fromiter((iidx[x.item] for x in rows), dtype=np.int64, count=len(rows))
        labels = np.fromiter((x.action is Action.LIKE for x in rows), dtype=np.float64, count=len(rows))
        if item_weights is None:
            weights = np.ones(len(rows))
        else:
            weights = np.fromiter((item_weights.get(x.item, 1.0) for x in rows), dtype=np.float64, count=len(rows))
        return cls(universe, users, items, labels, weights)

    def positives(self) -> np.ndarray:
        """Binary user x item Like matrix."""
        out = np.zeros((self.n_users, self.n_items))
        mask = self.labels == 1
        out[self.users[mask], self.items[mask]] = 1.0
        return out

    def observed_codes(self) -> np.ndarray:
        return np.unique(self.users * self.n_items + self.items)

    def fingerprint(self) -> str:
        from ..llm.messages import stable_digest

        return stable_digest(
            {
                "users": list(self.universe.users),
                "items": list(self.universe.items),
                "rows": np.stack([self.users, self.items, self.labels, self.weights]).round(12).tolist(),
            }
        )
