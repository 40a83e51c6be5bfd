"""User-control behaviours: result filtering and privacy obfuscation."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..agents import act, perceive
from ..core import Action, Interaction, Item, Personality, Source
from ..llm.messages import Backend


class Decision(enum.Enum):
    PASS_TO_USER = "pass_to_user"
    PASS_AND_OBSERVE = "pass_and_observe"
    PROXY_DISLIKE = "proxy_dislike"


class Strategy(enum.Enum):
    PSYCHOLOGIST = "psychologist"
    SHARED_ACCOUNT = "shared_account"


class ObfuscationError(ValueError):
    pass


@dataclass(frozen=True)
class IntentRules:
    """Explicit user instructions: facets to keep out, facets that are privacy-sensitive."""

    exclude_facets: frozenset[str] = frozenset()
    sensitive_facets: frozenset[str] = frozenset()

    def is_sensitive(self, item: Item) -> bool:
        return bool(item.tags & self.sensitive_facets)


@dataclass
class ForwardDecision:
    decisions: dict[str, Decision] = field(default_factory=dict)
    proxy_feedback: list[Interaction] = field(default_factory=list)


def filter_recommendations(
    personality: Personality,
    rules: IntentRules,
    candidates: Sequence[Item],
    backend: Backend,
) -> ForwardDecision:
    out = ForwardDecision()
    for item in candidates:
        perceived = perceive(item, backend)
        if perceived.attributes & rules.exclude_facets:
            decision = Decision.PROXY_DISLIKE
            comment = "excluded by the user's instructions: " + ", ".join(
                sorted(perceived.attributes & rules.exclude_facets)
            )
        else:
            outcome = act(perceived, personality, backend)
            comment = outcome.simulated_comment
            if not outcome.confident:
                decision = Decision.PASS_AND_OBSERVE
            elif outcome.predicted is Action.LIKE:
                decision = Decision.PASS_TO_USER
            else:
                decision = Decision.PROXY_DISLIKE
        out.decisions[item.id] = decision
        if decision is Decision.PROXY_DISLIKE:
            out.proxy_feedback.append(
                Interaction(
                    id=f"proxy:{personality.user}:{item.id}",
                    user=personality.user,
                    item=item.id,
                    action=Action.DISLIKE,
                    comment=comment,
                    source=Source.ASSISTANT_PROXY,
                )
            )
    return out


@dataclass(frozen=True)
class FilterRule:
    """Drops recommendations that only the obfuscation feedback explains.

    ``category`` rules remove any item carrying one of ``facets`` unless the user
    genuinely likes that facet; ``unexplained`` rules remove items touching
    ``facets`` that share nothing with the user's real likes.
    """

    facets: frozenset[str]
    mode: str = "unexplained"

    def removes(self, item: Item, real_likes: frozenset[str]) -> bool:
        hit = item.tags & self.facets
        if not hit:
            return False
        if self.mode == "category":
            return not hit <= real_likes
        return not item.tags & real_likes


@dataclass(frozen=True)
class ObfuscationPlan:
    strategy: Strategy
    extra_feedback: tuple[Interaction, ...]
    filter_rules: tuple[FilterRule, ...]

    def apply(
        self, recommendations: Iterable[str], catalog: Mapping[str, Item], real_likes: Iterable[str]
    ) -> list[str]:
        real_likes = frozenset(real_likes)
        return [
            iid
            for iid in recommendations
            if not any(rule.removes(catalog[iid], real_likes) for rule in self.filter_rules)
        ]


def obfuscate(
    user: str,
    trigger: Interaction,
    strategy: Strategy,
    catalog: Mapping[str, Item],
    seed: int,
    rules: IntentRules,
    k: int = 5,
    m: int = 10,
    professional_tag: str = "professional",
) -> ObfuscationPlan:
    trigger_item = catalog[trigger.item]
    if not rules.is_sensitive(trigger_item):
        raise ObfuscationError(f"trigger {trigger.id} is not flagged privacy-sensitive")
    rng = random.Random(f"{seed}:{strategy.value}:{user}:{trigger.id}")

    def extra(item_id: str, action: Action) -> Interaction:
        return Interaction(
            id=f"obfuscation:{strategy.value}:{user}:{item_id}",
            user=user,
            item=item_id,
            action=action,
            timestamp=trigger.timestamp,
            source=Source.OBFUSCATION,
        )

    if strategy is Strategy.PSYCHOLOGIST:
        topical = trigger_item.tags - rules.sensitive_facets - {professional_tag}
        eligible = sorted(
            iid
            for iid, it in catalog.items()
            if iid != trigger_item.id and professional_tag in it.tags and it.tags & topical
        )
        if not eligible:
            raise ObfuscationError(f"{strategy.value}: no professional items share a topic with {trigger_item.id}")
        chosen = sorted(rng.sample(eligible, min(k, len(eligible))))
        feedback = tuple(extra(iid, Action.LIKE) for iid in chosen)
        rules_out = (FilterRule(frozenset({professional_tag}), "category"),)
    else:
        eligible = sorted(iid for iid in catalog if iid != trigger_item.id)
        if not eligible:
            raise ObfuscationError(f"{strategy.value}: catalog has no items besides the trigger")
        chosen = sorted(rng.sample(eligible, min(m, len(eligible))))
        feedback = tuple(extra(iid, rng.choice((Action.LIKE, Action.DISLIKE))) for iid in chosen)
        liked = frozenset(f for fb in feedback if fb.action is Action.LIKE for f in catalog[fb.item].tags)
        rules_out = (FilterRule(liked - trigger_item.tags, "unexplained"),)
    return ObfuscationPlan(strategy, feedback, rules_out)
