"""Scripted control scenarios: result filtering and privacy obfuscation.

Scenario files are line based; ``#`` starts a comment and fields are
shell-quoted. Directives:

    scenario <name> <result_control|privacy>
    seed <int>
    item <id> <domain> <title> <tag> [<tag> ...]
    user <id> [likes=a,b] [dislikes=c]
    history <user> <item> <like|dislike> [comment]
    intent <user> [exclude=a,b] [sensitive=c]
    candidate <item>                   (result_control)
    trigger <user> <item> <like|dislike>   (privacy)
    strategy <psychologist|shared_account>  (privacy, repeatable)
    set <k|m|professional_tag> <value>
"""

from __future__ import annotations

import json
import shlex
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from ..alignment.control import (
    IntentRules,
    ObfuscationPlan,
    Strategy,
    filter_recommendations,
    obfuscate,
)
from ..alignment.loop import LoopConfig, learn_set
from ..agents import act, perceive
from ..core import Action, Interaction, Item, Personality, Source
from ..llm.oracle import OracleBackend, SyntheticUser, SyntheticWorld

KINDS = ("result_control", "privacy")


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<scenario>"):
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.line = line


@dataclass
class Scenario:
    name: str
    kind: str
    seed: int = 0
    items: dict[str, Item] = field(default_factory=dict)
    users: dict[str, SyntheticUser] = field(default_factory=dict)
    history: list[Interaction] = field(default_factory=list)
    intents: dict[str, IntentRules] = field(default_factory=dict)
    candidates: list[str] = field(default_factory=list)
    trigger: Interaction | None = None
    strategies: list[Strategy] = field(default_factory=list)
    settings: dict[str, str] = field(default_factory=dict)


def _facets(value: str) -> frozenset[str]:
    return frozenset(p.strip() for p in value.split(",") if p.strip())


def _options(tokens: list[str], allowed: set[str], lineno: int, source: str) -> dict[str, str]:
    out = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep or key not in allowed:
            raise ScenarioError(f"unexpected option {tok!r}", lineno, source)
        out[key] = value
    return out


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    sc: Scenario | None = None
    ts = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        try:
            tokens = shlex.split(raw, comments=True)
        except ValueError as exc:
            raise ScenarioError(str(exc), lineno, source) from None
        if not tokens:
            continue
        head, args = tokens[0], tokens[1:]
        if head == "scenario":
            if sc is not None or len(args) != 2 or args[1] not in KINDS:
                raise ScenarioError("expected 'scenario <name> <kind>' once, first", lineno, source)
            sc = Scenario(args[0], args[1])
            continue
        if sc is None:
            raise ScenarioError("the first directive must be 'scenario'", lineno, source)
        try:
            if head == "seed" and len(args) == 1:
                sc.seed = int(args[0])
            elif head == "item" and len(args) >= 4:
                iid, domain, title, *tags = args
                if iid in sc.items:
                    raise ScenarioError(f"duplicate item {iid}", lineno, source)
                sc.items[iid] = Item(iid, domain, title, "", frozenset(tags))
            elif head == "user" and args:
                opts = _options(args[1:], {"likes", "dislikes"}, lineno, source)
                sc.users[args[0]] = SyntheticUser(_facets(opts.get("likes", "")), _facets(opts.get("dislikes", "")))
            elif head in ("history", "trigger") and len(args) in (3, 4):
                user, iid, action = args[:3]
                if iid not in sc.items:
                    raise ScenarioError(f"unknown item {iid}", lineno, source)
                ts += 1
                x = Interaction(f"{user}|{iid}|{ts}", user, iid, Action.parse(action), None, args[3] if len(args) == 4 else None, ts)
                if head == "history":
                    sc.history.append(x)
                else:
                    sc.trigger = x
            elif head == "intent" and args:
                opts = _options(args[1:], {"exclude", "sensitive"}, lineno, source)
                sc.intents[args[0]] = IntentRules(_facets(opts.get("exclude", "")), _facets(opts.get("sensitive", "")))
            elif head == "candidate" and len(args) == 1:
                if args[0] not in sc.items:
                    raise ScenarioError(f"unknown item {args[0]}", lineno, source)
                sc.candidates.append(args[0])
            elif head == "strategy" and len(args) == 1:
                sc.strategies.append(Strategy(args[0]))
            elif head == "set" and len(args) == 2 and args[0] in ("k", "m", "professional_tag"):
                sc.settings[args[0]] = args[1]
            else:
                raise ScenarioError(f"malformed {head!r} directive", lineno, source)
        except ScenarioError:
            raise
        except ValueError as exc:
            raise ScenarioError(str(exc), lineno, source) from None
    if sc is None:
        raise ScenarioError("empty scenario file", None, source)
    users = {x.user for x in sc.history} | ({sc.trigger.user} if sc.trigger else set())
    if len(users) != 1:
        raise ScenarioError("a scenario must script exactly one user", None, source)
    if sc.kind == "result_control" and not sc.candidates:
        raise ScenarioError("result_control needs at least one candidate", None, source)
    if sc.kind == "privacy" and (sc.trigger is None or not sc.strategies):
        raise ScenarioError("privacy needs a trigger and at least one strategy", None, source)
    return sc


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"), str(path))


@dataclass
class ScenarioRun:
    events: list[dict] = field(default_factory=list)
    decisions: dict[str, str] = field(default_factory=dict)
    plans: dict[str, ObfuscationPlan] = field(default_factory=dict)
    visible: dict[str, list[str]] = field(default_factory=dict)

    def log_text(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)

    @property
    def sound(self) -> bool:
        """Every obfuscated run shows the user exactly the baseline list."""
        base = self.visible.get("baseline")
        return base is not None and all(v == base for k, v in self.visible.items() if k != "baseline")


def _world(sc: Scenario) -> SyntheticWorld:
    user = next(iter({x.user for x in sc.history} | ({sc.trigger.user} if sc.trigger else set())))
    users = dict(sc.users)
    users.setdefault(user, SyntheticUser(frozenset(), frozenset()))
    return SyntheticWorld(sc.items, users, sc.seed)


def _learn(sc: Scenario, rows: list[Interaction], backend) -> Personality:
    user = rows[0].user
    world_user = sc.users.get(user)
    responder = (lambda u, f: world_user.answer(f)) if world_user else None
    loop = LoopConfig.from_variant("L+C+R", answer_queries=responder is not None)
    return learn_set(user, rows, sc.items, loop, backend, responder)


def content_recommendations(feedback: Iterable[Interaction], catalog: Mapping[str, Item]) -> list[str]:
    """Stand-in recommender: every item sharing a tag with liked feedback, by overlap count then id."""
    liked_tags = Counter()
    for x in feedback:
        if x.action is Action.LIKE:
            liked_tags.update(catalog[x.item].tags)
    scored = [(-sum(liked_tags[t] for t in it.tags), iid) for iid, it in catalog.items()]
    return [iid for s, iid in sorted(scored) if s < 0]


def _visible(
    recs: list[str],
    sc: Scenario,
    personality: Personality,
    real: list[Interaction],
    backend,
    plan: ObfuscationPlan | None,
) -> list[str]:
    seen = {x.item for x in real}
    keep = []
    for iid in recs:
        if iid in seen:
            continue
        outcome = act(perceive(sc.items[iid], backend), personality, backend)
        if outcome.predicted is Action.DISLIKE:
            continue
        keep.append(iid)
    if plan is not None:
        keep = plan.apply(keep, sc.items, personality.like_facets)
    # catalog order, so upstream score shifts from obfuscation do not reorder the list
    return sorted(keep)


def run_scenario(sc: Scenario) -> ScenarioRun:
    backend = OracleBackend(_world(sc))
    run = ScenarioRun()
    log = run.events.append
    real = sorted(sc.history + ([sc.trigger] if sc.trigger else []), key=lambda x: (x.timestamp, x.id))
    personality = _learn(sc, real, backend) if real else Personality(next(iter(sc.users)))
    log({"scenario": sc.name, "event": "personality", "likes": sorted(personality.like_facets), "dislikes": sorted(personality.dislike_facets)})
    user = personality.user
    rules = sc.intents.get(user, IntentRules())

    if sc.kind == "result_control":
        fwd = filter_recommendations(personality, rules, [sc.items[i] for i in sc.candidates], backend)
        for iid in sc.candidates:
            run.decisions[iid] = fwd.decisions[iid].value
            log({"scenario": sc.name, "event": "decision", "item": iid, "decision": fwd.decisions[iid].value})
        for x in fwd.proxy_feedback:
            log({"scenario": sc.name, "event": "proxy_feedback", "id": x.id, "item": x.item, "action": x.action.value, "source": x.source.value})
        return run

    k = int(sc.settings.get("k", 5))
    m = int(sc.settings.get("m", 10))
    tag = sc.settings.get("professional_tag", "professional")
    run.visible["baseline"] = _visible(content_recommendations(real, sc.items), sc, personality, real, backend, None)
    log({"scenario": sc.name, "event": "visible", "run": "baseline", "items": run.visible["baseline"]})
    for strategy in sc.strategies:
        plan = obfuscate(user, sc.trigger, strategy, sc.items, sc.seed, rules, k=k, m=m, professional_tag=tag)
        real_ids = {x.id for x in real}
        if any(x.id in real_ids for x in plan.extra_feedback):
            raise ScenarioError(f"{strategy.value} reused a real interaction id")
        run.plans[strategy.value] = plan
        for x in plan.extra_feedback:
            log({"scenario": sc.name, "event": "obfuscation", "strategy": strategy.value, "id": x.id, "item": x.item, "action": x.action.value, "source": x.source.value})
        recs = content_recommendations(real + list(plan.extra_feedback), sc.items)
        run.visible[strategy.value] = _visible(recs, sc, personality, real, backend, plan)
        log({"scenario": sc.name, "event": "visible", "run": strategy.value, "items": run.visible[strategy.value]})
    log({"scenario": sc.name, "event": "soundness", "holds": run.sound})
    return run


FIG4A = """\
# The user watches movies with a child: family films that are neither too dark nor too childish.
scenario incredibles result_control
seed 7
item toy-story movie "Toy Story" family animation comedy
item incredibles movie "The Incredibles" family dark childish superhero
item coco movie "Coco" family animation music
item ironman movie "Ironman" action scifi
item batman movie "Batman: The Dark Knight" dark action crime
user parent likes=family,animation,comedy dislikes=dark,childish
history parent toy-story like "we loved it together"
history parent incredibles dislike "too childish for adults and too dark for children"
intent parent exclude=dark
candidate coco
candidate ironman
candidate batman
"""

FIG4B = """\
# A reader's interest in a depression self-help book should not reach the recommender unmasked.
scenario depression-book privacy
seed 11
item novel-a book "Harbor Lights" fiction romance
item novel-b book "Salt Roads" fiction adventure
item novel-c book "Quiet Tides" fiction romance coastal
item accounting book "Principles of Accounting" finance professional textbook
item depression book "Living Through Depression" depression psychology selfhelp
item psy-1 book "Clinical Psychology" psychology professional textbook
item psy-2 book "Abnormal Psychology" psychology professional textbook
item psy-3 book "Cognitive Therapy Manual" psychology professional therapy
item psy-4 book "Counseling Theory" psychology professional counseling
item psy-5 book "Psychological Assessment" psychology professional assessment
item psy-6 book "Research Methods in Psychology" psychology professional research
item novel-d book "The Lantern Case" fiction mystery
item mindful book "Mindful Days" selfhelp psychology wellbeing
item habits book "Small Habits" selfhelp habits
item cook book "Seaside Cooking" cooking coastal
item garden book "Small Gardens" gardening hobby
item chess book "Chess Openings" chess hobby strategy
item war movie "Long Winter" war history
item toon movie "Paper Boats" animation family
item race game "Turbo Lap" racing sports
user reader likes=fiction,romance,psychology,selfhelp,depression dislikes=professional,textbook,finance
history reader novel-a like
history reader novel-b like
history reader accounting dislike "dry textbook"
intent reader sensitive=depression
trigger reader depression like
strategy psychologist
strategy shared_account
set k 5
set m 10
"""


def builtin_scenarios() -> dict[str, str]:
    return {"incredibles": FIG4A, "depression-book": FIG4B}
