"""Top-k ranking metrics with binary relevance."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..core import Action, Interaction
from .dataset import Universe
from .models import Recommender, rank

logger = logging.getLogger(__name__)


def dcg_at_k(ranked: Sequence, relevant: set, k: int = 10) -> float:
    return sum(1.0 / math.log2(pos + 2) for pos, item in enumerate(ranked[:k]) if item in relevant)


def ndcg_at_k(ranked: Sequence, relevant: Iterable, k: int = 10) -> float:
    relevant = set(relevant)
    if not relevant:
        raise ValueError("NDCG needs at least one relevant item")
    ideal = sum(1.0 / math.log2(pos + 2) for pos in range(min(len(relevant), k)))
    return dcg_at_k(ranked, relevant, k) / ideal


def recall_at_k(ranked: Sequence, relevant: Iterable, k: int = 10) -> float:
    relevant = set(relevant)
    if not relevant:
        raise ValueError("recall needs at least one relevant item")
    return len(relevant & set(ranked[:k])) / len(relevant)


@dataclass(frozen=True)
class EvalReport:
    ndcg: float
    recall: float
    per_user: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    skipped_users: tuple[str, ...] = ()

    @property
    def n_users(self) -> int:
        return len(self.per_user)


def evaluate(
    model: Recommender,
    test: Iterable[Interaction],
    exclude: Mapping[str, Iterable[str]] | None = None,
    domain: str | None = None,
    k: int = 10,
) -> EvalReport:
    """Macro NDCG@k / Recall@k over users; the test user's Likes are the relevant items.

    Candidates are every catalog item in ``domain`` (all domains when None) minus
    that user's ``exclude`` items. Users with no relevant test item are skipped.
    """
    universe: Universe = model.universe
    uidx, iidx = universe.user_index(), universe.item_index()
    pool = np.flatnonzero(universe.domain_mask(domain)).tolist()
    in_pool = set(pool)
    relevant: dict[str, set[int]] = defaultdict(set)
    seen_users: set[str] = set()
    for x in test:
        idx = iidx[x.item]
        if idx not in in_pool:
            continue
        seen_users.add(x.user)
        if x.action is Action.LIKE:
            relevant[x.user].add(idx)
    exclude = exclude or {}
    per_user: dict[str, tuple[float, float]] = {}
    skipped = sorted(seen_users - set(relevant))
    if skipped:
        logger.info("%d test users have no relevant items and are excluded", len(skipped))
    users = sorted(relevant)
    if users:
        scores = model.score_matrix([uidx[u] for u in users])
        for row, user in zip(scores, users):
            banned = {iidx[i] for i in exclude.get(user, ())} - relevant[user]
            ranked = rank(model, uidx[user], pool, banned, k, scores=row)
            per_user[user] = (ndcg_at_k(ranked, relevant[user], k), recall_at_k(ranked, relevant[user], k))
    if not per_user:
        return EvalReport(0.0, 0.0, {}, tuple(skipped))
    # fixed user order keeps the reduction deterministic
    ndcg = math.fsum(per_user[u][0] for u in users) / len(users)
    recall = math.fsum(per_user[u][1] for u in users) / len(users)
    return EvalReport(ndcg, recall, per_user, tuple(skipped))
