"""Seeded synthetic worlds: a tagged multi-domain catalog, users with tag
preferences, and the Human interactions those users would produce.

Every item carries one shared genre tag plus one domain-specific subtag, so
preferences learned in one domain transfer to another through the genre.
Users like ``liked_per_user`` genres, dislike ``disliked_per_user`` genres and
are neutral on the rest (neutral items come out as Dislike under the tie rule).
Consumption is biased toward liked genres by ``affinity`` and toward popular
items by a Zipf weight ``rank ** -zipf``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, fields
from typing import Iterable

import numpy as np

from ..core import PAPER_DOMAINS, Action, Interaction, Item, Source
from ..llm.oracle import SyntheticUser, SyntheticWorld

GENRES = (
    "family", "dark", "comedy", "scifi", "romance", "history",
    "crime", "fantasy", "music", "sports", "horror", "mystery",
)


@dataclass(frozen=True)
class WorldConfig:
    n_users: int = 50
    n_items: int = 300
    domains: tuple[str, ...] = PAPER_DOMAINS
    n_genres: int = 5
    subtags_per_genre: int = 4
    liked_per_user: int = 1
    disliked_per_user: int = 2
    per_domain: int = 30
    affinity: float = 8.0
    zipf: float = 0.0
    noise_rate: float = 0.0
    n_background: int = 0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "domains", tuple(self.domains))
        for name in ("n_users", "n_items", "n_genres", "subtags_per_genre", "per_domain"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not self.domains:
            raise ValueError("at least one domain is required")
        if self.n_genres > len(GENRES):
            raise ValueError(f"at most {len(GENRES)} genres are available")
        if self.liked_per_user < 1 or self.disliked_per_user < 0:
            raise ValueError("liked_per_user must be >= 1 and disliked_per_user >= 0")
        if self.liked_per_user + self.disliked_per_user > self.n_genres:
            raise ValueError("liked plus disliked genres exceed the number of genres")
        if self.n_items < len(self.domains):
            raise ValueError("need at least one item per domain")
        if self.per_domain > self.n_items // len(self.domains):
            raise ValueError("per_domain exceeds the number of items in a domain")
        if self.affinity <= 0 or self.zipf < 0 or self.n_background < 0:
            raise ValueError("affinity must be positive, zipf and n_background non-negative")
        if not 0.0 <= self.noise_rate < 1.0:
            raise ValueError("noise_rate must lie in [0, 1)")

    @property
    def preference_sparsity(self) -> float:
        """Fraction of genres a user has no opinion about."""
        return 1.0 - (self.liked_per_user + self.disliked_per_user) / self.n_genres

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def user_ids(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i:04d}" for i in range(n)]


def _catalog(config: WorldConfig, rng: random.Random) -> tuple[dict[str, Item], dict[str, np.ndarray]]:
    genres = GENRES[: config.n_genres]
    catalog: dict[str, Item] = {}
    popularity: dict[str, np.ndarray] = {}
    base, extra = divmod(config.n_items, len(config.domains))
    for d_idx, domain in enumerate(config.domains):
        size = base + (1 if d_idx < extra else 0)
        for j in range(size):
            # cycle genres so every genre is equally represented in each domain
            genre = genres[j % len(genres)]
            sub = f"{genre}.{domain}{rng.randrange(config.subtags_per_genre)}"
            iid = f"{domain[0]}{d_idx}-{j:04d}"
            catalog[iid] = Item(iid, domain, f"{domain.title()} {j:04d}", "", frozenset({genre, sub}))
        ranks = np.arange(1, size + 1, dtype=float)
        rng_perm = list(range(size))
        rng.shuffle(rng_perm)
        popularity[domain] = ranks[rng_perm] ** -config.zipf
    return catalog, popularity


def _user(config: WorldConfig, rng: random.Random) -> SyntheticUser:
    picked = rng.sample(GENRES[: config.n_genres], config.liked_per_user + config.disliked_per_user)
    return SyntheticUser(
        frozenset(picked[: config.liked_per_user]),
        frozenset(picked[config.liked_per_user:]),
        config.noise_rate,
    )


def _consume(
    world: SyntheticWorld,
    user: str,
    config: WorldConfig,
    popularity: dict[str, np.ndarray],
    np_rng: np.random.Generator,
) -> list[Interaction]:
    profile = world.users[user]
    out = []
    ts = 0
    for domain in config.domains:
        ids = sorted(iid for iid, it in world.catalog.items() if it.domain == domain)
        weights = popularity[domain].copy()
        for pos, iid in enumerate(ids):
            if world.catalog[iid].tags & profile.liked_tags:
                weights[pos] *= config.affinity
        chosen = np_rng.choice(len(ids), size=config.per_domain, replace=False, p=weights / weights.sum())
        for pos in chosen:
            iid = ids[int(pos)]
            action = world.human_action(user, iid)
            ts += 1 + int(np_rng.integers(0, 1000))
            out.append(
                Interaction(
                    id=f"{user}|{iid}|{ts}",
                    user=user,
                    item=iid,
                    action=action,
                    rating=5 if action is Action.LIKE else 1,
                    timestamp=ts,
                    source=Source.HUMAN,
                )
            )
    return out


def make_world(config: WorldConfig) -> tuple[SyntheticWorld, list[Interaction], list[Interaction]]:
    """Returns (world, panel interactions, background-cohort interactions).

    The panel is the ``n_users`` users under study; the background cohort
    shares the world but only supplies training data for recommenders.
    """
    rng = random.Random(f"world:{config.seed}")
    catalog, popularity = _catalog(config, rng)
    panel = user_ids("u", config.n_users)
    background = user_ids("bg", config.n_background)
    users = {uid: _user(config, rng) for uid in panel + background}
    world = SyntheticWorld(catalog, users, config.seed)
    np_rng = np.random.default_rng(config.seed)
    panel_rows = [x for uid in panel for x in _consume(world, uid, config, popularity, np_rng)]
    bg_rows = [x for uid in background for x in _consume(world, uid, config, popularity, np_rng)]
    return world, panel_rows, bg_rows


def item_domains(catalog) -> dict[str, str]:
    return {iid: it.domain for iid, it in catalog.items()}


def panel_users(interactions: Iterable[Interaction]) -> list[str]:
    return sorted({x.user for x in interactions})
