"""Personality alignment: F1 of proxy actions against the users' own actions."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Mapping, Sequence

from ..alignment.loop import LoopConfig, proxy_actions
from ..core import Action, Interaction, SplitName
from .common import by_user, learn_users, make_backend, split_sets, world_for
from .config import ExperimentConfig


def f1_binary(truth: Sequence[Action], predicted: Sequence[Action], positive: Action) -> float:
    tp = sum(t is positive and p is positive for t, p in zip(truth, predicted))
    fp = sum(t is not positive and p is positive for t, p in zip(truth, predicted))
    fn = sum(t is positive and p is not positive for t, p in zip(truth, predicted))
    if tp == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


def macro_f1(truth: Sequence[Action], predicted: Sequence[Action]) -> float:
    """Mean per-class F1 over Like and Dislike.

    A class absent from both the truth and the predictions has no defined F1 and is left out.
    """
    if len(truth) != len(predicted):
        raise ValueError("truth and predictions differ in length")
    if not truth:
        raise ValueError("macro-F1 of an empty sequence")
    scores = [
        f1_binary(truth, predicted, cls)
        for cls in Action
        if any(t is cls for t in truth) or any(p is cls for p in predicted)
    ]
    return sum(scores) / len(scores)


@dataclass
class F1Report:
    """variant -> scope -> mean per-user macro-F1."""

    seed: int
    scores: dict[str, dict[str, float]] = field(default_factory=dict)

    def rows(self) -> list[tuple[str, str, float]]:
        return [(v, s, f) for v, table in self.scores.items() for s, f in table.items()]


def _user_f1(personality, items, truth: Mapping[str, Action], backend) -> float:
    preds = proxy_actions(personality, items, backend)
    got = {p.item: p.action for p in preds}
    ids = [it.id for it in items if it.id in got]
    return macro_f1([truth[i] for i in ids], [got[i] for i in ids])


def scope_names(domains: Iterable[str]) -> list[str]:
    domains = sorted(domains)
    names = [f"single:{d}" for d in domains]
    names += [f"cross:{a}->{b}" for a, b in permutations(domains, 2)]
    return names + ["cross:mean", "mixed"]


def e1_alignment(config: ExperimentConfig, seed: int) -> F1Report:
    world, panel, _ = world_for(config, seed)
    backend = make_backend(config, world)
    sets = split_sets(panel, seed)
    domains = world.domains()
    dom = {iid: it.domain for iid, it in world.catalog.items()}
    learn_rows = by_user(sets[SplitName.LEARN])
    proxy_rows = by_user(sets[SplitName.PROXY])
    users = sorted(by_user(panel))

    def rows_in(rows, domain):
        return {u: [x for x in xs if dom[x.item] == domain] for u, xs in rows.items()}

    report = F1Report(seed)
    for variant in config.e1.variants:
        loop = LoopConfig.from_variant(variant, max_iters=config.e1.max_iters, answer_queries=config.e1.answer_queries)
        per_domain = {d: learn_users(rows_in(learn_rows, d), users, world.catalog, loop, backend, world) for d in domains}
        mixed = learn_users(learn_rows, users, world.catalog, loop, backend, world)
        cells: dict[str, list[float]] = {name: [] for name in scope_names(domains)}
        for user in users:
            targets: list[Interaction] = proxy_rows.get(user, [])
            truth = {x.item: x.action for x in targets}
            items_by_domain = {d: [world.catalog[x.item] for x in targets if dom[x.item] == d] for d in domains}
            for source in domains:
                for target in domains:
                    items = items_by_domain[target]
                    if not items:
                        continue
                    score = _user_f1(per_domain[source][user], items, truth, backend)
                    key = f"single:{source}" if source == target else f"cross:{source}->{target}"
                    cells[key].append(score)
            if targets:
                cells["mixed"].append(_user_f1(mixed[user], [world.catalog[x.item] for x in targets], truth, backend))
        table = {}
        for name, values in cells.items():
            if name == "cross:mean":
                continue
            table[name] = sum(values) / len(values) if values else 0.0
        pairs = [table[n] for n in table if n.startswith("cross:")]
        table["cross:mean"] = sum(pairs) / len(pairs) if pairs else 0.0
        report.scores[variant] = {name: table[name] for name in scope_names(domains)}
    return report
