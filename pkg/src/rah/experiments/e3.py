"""Popularity-bias mitigation: IPS weighting and assistant feedback on rare items."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..alignment.loop import LoopConfig
from ..debias import augment_unpopular, estimate_propensity, ips_weights, sample_unbiased_test
from ..recsys.dataset import RecDataset, Universe
from ..recsys.metrics import EvalReport, evaluate
from ..recsys.models import fit
from .common import by_user, learn_users, make_backend, world_for
from .config import ExperimentConfig
from .e2 import positives_by_user

ARMS = ("MF", "MF+IPS", "MF+RAH", "MF+IPS+RAH")


@dataclass
class E3Result:
    seed: int
    reports: dict[str, EvalReport] = field(default_factory=dict)
    augmented: int = 0
    test_size: int = 0


def e3_bias(config: ExperimentConfig, seed: int) -> E3Result:
    world, panel, background = world_for(config, seed, zipf=config.e3.zipf)
    backend = make_backend(config, world)
    observed = panel + background
    size = int(round(config.e3.test_fraction * len(panel)))
    test = sample_unbiased_test(panel, size, seed)
    test_ids = {x.id for x in test}
    train = sorted((x for x in observed if x.id not in test_ids), key=lambda x: x.id)

    augmented = []
    if config.e3.threshold > 0:
        loop = LoopConfig.from_variant(config.e3.variant, max_iters=config.e1.max_iters, answer_queries=config.e1.answer_queries)
        rows = by_user(train)
        assistants = learn_users(rows, rows, world.catalog, loop, backend, world)
        augmented = augment_unpopular(
            world.catalog,
            train,
            assistants,
            backend,
            threshold=config.e3.threshold,
            seed=seed,
        )

    universe = Universe.build({x.user for x in observed}, world.catalog)
    consumed = positives_by_user(train)
    result = E3Result(seed, augmented=len(augmented), test_size=len(test))
    for arm in ARMS:
        rows = train + augmented if "RAH" in arm else train
        weights = None
        if "IPS" in arm:
            table = estimate_propensity(rows, config.e3.gamma, config.e3.clip, world.catalog)
            raw = ips_weights(table)
            # rescale to mean 1 over the training rows so arms share an effective step size
            mean = sum(raw[x.item] for x in rows) / len(rows)
            weights = {iid: w / mean for iid, w in raw.items()}
        data = RecDataset.build(universe, rows, weights)
        model = fit("mf", data, seed, factor=config.mf)
        result.reports[arm] = evaluate(model, test, consumed, None, config.e3.k)
    return result
