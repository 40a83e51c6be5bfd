"""Exposure propensities, inverse-propensity weights, unbiased test sampling and
proxy augmentation of rarely reviewed items."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .alignment.loop import proxy_actions
from .core import Interaction, Item, Personality
from .llm.messages import Backend


@dataclass(frozen=True)
class PropensityTable:
    propensity: Mapping[str, float]
    counts: Mapping[str, int]
    gamma: float = 1.0
    clip: float = 0.01

    def __getitem__(self, item: str) -> float:
        return self.propensity[item]

    def dumps(self) -> str:
        return "".join(f"{iid}\t{self.propensity[iid]:.12g}\n" for iid in sorted(self.propensity))

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")


def estimate_propensity(
    interactions: Iterable[Interaction],
    gamma: float = 1.0,
    clip: float = 0.01,
    catalog: Iterable[str] = (),
) -> PropensityTable:
    """p_i = max(clip, (n_i / max_j n_j) ** gamma); catalog items never observed get ``clip``."""
    if not 0 < clip <= 1:
        raise ValueError("clip must lie in (0, 1]")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    counts = Counter(x.item for x in interactions)
    if not counts:
        raise ValueError("cannot estimate propensities from no interactions")
    top = max(counts.values())
    table = {iid: max(clip, (n / top) ** gamma) for iid, n in counts.items()}
    for iid in catalog:
        if iid not in table:
            table[iid] = clip
            counts[iid] = 0
    return PropensityTable(table, dict(counts), gamma, clip)


def ips_weights(table: PropensityTable) -> dict[str, float]:
    return {iid: 1.0 / p for iid, p in table.propensity.items()}


def inclusion_weights(interactions: Sequence[Interaction], counts: Mapping[str, int] | None = None) -> np.ndarray:
    """1 / n_item per row; item frequencies come from ``counts`` or from the rows themselves."""
    counts = Counter(x.item for x in interactions) if counts is None else counts
    return np.array([1.0 / counts[x.item] for x in interactions])


def sample_unbiased_test(
    interactions: Sequence[Interaction], size: int, seed: int, counts: Mapping[str, int] | None = None
) -> list[Interaction]:
    """Weighted draw without replacement, each draw proportional to 1 / n_item among those left."""
    rows = sorted(interactions, key=lambda x: x.id)
    if size > len(rows) or size < 0:
        raise ValueError(f"cannot draw {size} of {len(rows)} interactions")
    if size == 0:
        return []
    rng = np.random.default_rng(seed)
    weights = inclusion_weights(rows, counts)
    picked = rng.choice(len(rows), size=size, replace=False, p=weights / weights.sum())
    return [rows[k] for k in sorted(picked)]


def augment_unpopular(
    catalog: Mapping[str, Item],
    interactions: Iterable[Interaction],
    assistants: Mapping[str, Personality],
    backend: Backend,
    threshold: int = 10,
    seed: int = 0,
    exclude: Iterable[tuple[str, str]] = (),
) -> list[Interaction]:
    """Top every item up to ``threshold`` reviews with proxy feedback from distinct assistants.

    Assistants whose user already reviewed the item (in ``interactions`` or the
    extra ``exclude`` pairs) are never chosen for it. Each item draws from its
    own seeded generator, so the result does not depend on processing order.
    """
    rows = list(interactions)
    counts = Counter(x.item for x in rows)
    taken = {(x.user, x.item) for x in rows} | set(exclude)
    pool = sorted(assistants)
    out: list[Interaction] = []
    for iid in sorted(catalog):
        need = threshold - counts.get(iid, 0)
        if need <= 0:
            continue
        eligible = [u for u in pool if (u, iid) not in taken]
        if len(eligible) < need:
            raise ValueError(f"item {iid} needs {need} proxy reviews but only {len(eligible)} assistants are eligible")
        chosen = random.Random(f"{seed}:{iid}").sample(eligible, need)
        for user in sorted(chosen):
            made = proxy_actions(assistants[user], [catalog[iid]], backend)
            if not made:
                raise ValueError(f"assistant {user} could not act on item {iid}")
            out.extend(made)
    return out


def review_counts(interactions: Iterable[Interaction], catalog: Iterable[str]) -> dict[str, int]:
    counts = Counter(x.item for x in interactions)
    return {iid: counts.get(iid, 0) for iid in catalog}
