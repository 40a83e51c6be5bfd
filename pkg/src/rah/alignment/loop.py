"""Learn-Act-Critic iteration, reflection cadence, and proxy feedback."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from ..agents import (
    ActOutcome,
    CandidateTraits,
    Verdict,
    act,
    critic,
    learn,
    perceive,
    reflect,
)
from ..core import Action, Interaction, Item, Personality, Source, TraitEntry, facet_statement
from ..llm.messages import Backend, GatewayError

logger = logging.getLogger(__name__)

# (user, facet) -> the user's answer to a reflection query; None means "neither".
QueryResponder = Callable[[str, str], "Action | None"]

VARIANTS = ("L", "L+R", "L+C", "L+C+R")


class RunError(RuntimeError):
    pass


@dataclass(frozen=True)
class LoopConfig:
    max_iters: int = 3
    use_critic: bool = True
    use_reflect: bool = True
    answer_queries: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    @property
    def variant(self) -> str:
        return "L" + ("+C" if self.use_critic else "") + ("+R" if self.use_reflect else "")

    @classmethod
    def from_variant(cls, name: str, **kwargs) -> LoopConfig:
        if name not in VARIANTS:
            raise ValueError(f"unknown variant {name!r}; expected one of {VARIANTS}")
        return cls(use_critic="C" in name, use_reflect="R" in name, **kwargs)


@dataclass
class LoopTrace:
    iterations: list[tuple[CandidateTraits, ActOutcome | None, Verdict | None]] = field(default_factory=list)
    accepted: CandidateTraits | None = None
    converged: bool = False
    user_queries: list[str] = field(default_factory=list)
    answered: int = 0


def _answered_entries(
    user: str,
    conflicts: Sequence[str],
    responder: QueryResponder,
    sources: Iterable[TraitEntry],
    counter: int,
) -> list[TraitEntry]:
    sources = list(sources)
    out = []
    for facet in conflicts:
        answer = responder(user, facet)
        if answer is None:
            continue
        provenance = frozenset().union(*(e.provenance for e in sources if facet in e.facets))
        out.append(TraitEntry(answer, facet_statement(answer, [facet]), frozenset({facet}), provenance, counter))
        counter += 1
    return out


def learn_one(
    interaction: Interaction,
    item: Item,
    personality: Personality,
    config: LoopConfig,
    backend: Backend,
    responder: QueryResponder | None = None,
) -> tuple[Personality, LoopTrace]:
    """Learn from one interaction; on gateway errors the caller keeps the old personality."""
    if interaction.user != personality.user:
        raise ValueError(f"interaction {interaction.id} does not belong to {personality.user}")
    if interaction.item != item.id:
        raise ValueError(f"interaction {interaction.id} is about {interaction.item}, not {item.id}")
    trace = LoopTrace()
    perceived = perceive(item, backend)
    critique: Verdict | None = None
    rounds = config.max_iters if config.use_critic else 1
    candidate = None
    for _ in range(rounds):
        candidate = learn(perceived, interaction, personality, critique, backend)
        if not config.use_critic:
            trace.iterations.append((candidate, None, None))
            break
        # The candidate alone must reproduce the user's action in reverse.
        outcome = act(perceived, candidate.entries, backend)
        verdict = critic(outcome, interaction.action, perceived, candidate.entries, backend)
        trace.iterations.append((candidate, outcome, verdict))
        if verdict.passed:
            trace.converged = True
            break
        critique = verdict
    trace.accepted = candidate
    if not config.use_reflect:
        return personality.appended(candidate.entries), trace

    result = reflect(personality, candidate, backend)
    merged = result.merged
    trace.user_queries = list(result.user_queries)
    if config.answer_queries and responder is not None and result.conflicting_facets:
        answers = _answered_entries(
            personality.user,
            result.conflicting_facets,
            responder,
            list(personality.entries) + list(candidate.entries),
            merged.next_counter(),
        )
        trace.answered = len(answers)
        merged = Personality(merged.user, merged.entries + tuple(answers))
    return merged, trace


def learn_set(
    user: str,
    interactions: Iterable[Interaction],
    catalog: Mapping[str, Item],
    config: LoopConfig,
    backend: Backend,
    responder: QueryResponder | None = None,
    personality: Personality | None = None,
    on_trace: Callable[[Interaction, LoopTrace], None] | None = None,
) -> Personality:
    """Fold learn_one over interactions in timestamp order."""
    ordered = sorted(interactions, key=lambda x: (x.timestamp, x.id))
    personality = personality or Personality(user)
    failures = 0
    for interaction in ordered:
        if interaction.user != user:
            raise ValueError(f"interaction {interaction.id} belongs to {interaction.user}, not {user}")
        try:
            personality, trace = learn_one(
                interaction, catalog[interaction.item], personality, config, backend, responder
            )
        except (GatewayError, KeyError) as exc:
            failures += 1
            logger.warning("learning from %s failed: %s", interaction.id, exc)
            continue
        if on_trace is not None:
            on_trace(interaction, trace)
    if ordered and failures * 2 > len(ordered):
        raise RunError(f"{failures} of {len(ordered)} interactions failed for user {user}")
    return personality


def proxy_actions(
    personality: Personality,
    items: Iterable[Item],
    backend: Backend,
    source: Source = Source.ASSISTANT_PROXY,
) -> list[Interaction]:
    """One proxy interaction per item; read-only on the personality."""
    out = []
    for item in items:
        try:
            outcome = act(perceive(item, backend), personality, backend)
        except GatewayError as exc:
            logger.warning("proxy action on %s for %s skipped: %s", item.id, personality.user, exc)
            continue
        out.append(
            Interaction(
                id=f"proxy:{personality.user}:{item.id}",
                user=personality.user,
                item=item.id,
                action=outcome.predicted,
                comment=outcome.simulated_comment,
                source=source,
            )
        )
    return out
