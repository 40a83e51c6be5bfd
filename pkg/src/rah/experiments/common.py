"""Shared plumbing: backend construction, splits, and per-user grouping."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import replace
from typing import Iterable, Mapping

from ..core import Interaction, Item, Personality, SplitName
from ..alignment.loop import LoopConfig, learn_set
from ..data.split import partition, split_lpu
from ..data.world import make_world
from ..llm.cache import CachedBackend
from ..llm.messages import Backend
from ..llm.oracle import OracleBackend, SyntheticWorld
from ..llm.remote import RemoteBackend, RemoteConfig
from .config import ExperimentConfig


def make_backend(config: ExperimentConfig, world: SyntheticWorld) -> Backend:
    backend: Backend
    if config.run.backend == "oracle":
        backend = OracleBackend(world)
    else:
        backend = RemoteBackend(RemoteConfig.from_env())
    if config.run.cache_dir:
        backend = CachedBackend(backend, config.run.cache_dir)
    return backend


def world_for(config: ExperimentConfig, seed: int, **overrides):
    return make_world(replace(config.world, seed=seed, **overrides))


def by_user(interactions: Iterable[Interaction]) -> dict[str, list[Interaction]]:
    out: dict[str, list[Interaction]] = defaultdict(list)
    for x in interactions:
        out[x.user].append(x)
    return dict(out)


def split_sets(interactions: list[Interaction], seed: int) -> dict[SplitName, list[Interaction]]:
    return partition(interactions, split_lpu(interactions, seed))


def learn_users(
    rows: Mapping[str, list[Interaction]],
    users: Iterable[str],
    catalog: Mapping[str, Item],
    loop: LoopConfig,
    backend: Backend,
    world: SyntheticWorld | None,
) -> dict[str, Personality]:
    """Personalities for ``users``; query answers come from the synthetic users when a world is known."""
    responder = None
    if world is not None:
        responder = lambda user, facet: world.user(user).answer(facet)  # noqa: E731
    return {
        u: learn_set(u, rows.get(u, []), catalog, loop, backend, responder)
        for u in sorted(users)
    }
