"""Proxy-feedback lift: recommenders trained with and without assistant feedback."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..alignment.loop import LoopConfig, proxy_actions
from ..core import Action, Interaction, Source, SplitName
from ..recsys.dataset import RecDataset, Universe
from ..recsys.metrics import EvalReport, evaluate
from ..recsys.models import fit
from .common import by_user, learn_users, make_backend, split_sets, world_for
from .config import ExperimentConfig

ARMS = ("none", "random", "assistant")


class ComparisonError(RuntimeError):
    pass


@dataclass
class E2Result:
    seed: int
    base_hash: str = ""
    # (model, arm, scope) -> report
    reports: dict[tuple[str, str, str], EvalReport] = field(default_factory=dict)
    proxy_counts: dict[str, int] = field(default_factory=dict)


def random_actions(items: list[Interaction], seed: int) -> list[Interaction]:
    """Coin-flip Like/Dislike on exactly the items the assistant acts on."""
    rng = random.Random(f"random-baseline:{seed}")
    return [
        Interaction(
            id=f"random:{x.user}:{x.item}",
            user=x.user,
            item=x.item,
            action=rng.choice((Action.LIKE, Action.DISLIKE)),
            source=Source.RANDOM_BASELINE,
        )
        for x in sorted(items, key=lambda x: x.id)
    ]


def positives_by_user(rows) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {}
    for x in rows:
        if x.action is Action.LIKE:
            out.setdefault(x.user, set()).add(x.item)
    return out


def e2_proxy(config: ExperimentConfig, seed: int) -> E2Result:
    world, panel, background = world_for(config, seed)
    backend = make_backend(config, world)
    sets = split_sets(panel, seed)
    learn, proxy, unseen = sets[SplitName.LEARN], sets[SplitName.PROXY], sets[SplitName.UNSEEN]
    loop = LoopConfig.from_variant(config.e2.variant, max_iters=config.e1.max_iters, answer_queries=config.e1.answer_queries)
    personalities = learn_users(by_user(learn), by_user(panel), world.catalog, loop, backend, world)

    proxy_by_user = by_user(proxy)
    assistant = []
    for user in sorted(proxy_by_user):
        items = [world.catalog[x.item] for x in sorted(proxy_by_user[user], key=lambda x: x.id)]
        assistant.extend(proxy_actions(personalities[user], items, backend))
    if {(x.user, x.item) for x in assistant} != {(x.user, x.item) for x in proxy}:
        raise ComparisonError("assistant did not act on every Proxy-Set item")
    extra = {"none": [], "random": random_actions(proxy, seed), "assistant": assistant}

    universe = Universe.build({x.user for x in panel + background}, world.catalog)
    base = background + learn
    base_hash = RecDataset.build(universe, base).fingerprint()
    result = E2Result(seed, base_hash, proxy_counts={arm: len(rows) for arm, rows in extra.items()})
    for arm in ARMS:
        rows = base + extra[arm]
        data = RecDataset.build(universe, rows)
        exclude = positives_by_user(rows)
        for kind in config.e2.models:
            model = fit(kind, data, seed, factor=getattr(config, kind, None) if kind in ("mf", "fm") else None, knn=config.knn)
            for scope in world.domains() + ["all"]:
                result.reports[(kind, arm, scope)] = evaluate(
                    model, unseen, exclude, None if scope == "all" else scope, config.e2.k
                )
    return result
