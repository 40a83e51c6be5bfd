import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rah.alignment import (
    Decision,
    FilterRule,
    IntentRules,
    LoopConfig,
    MigrationError,
    ObfuscationError,
    PersonalityDecodeError,
    RunError,
    Strategy,
    filter_recommendations,
    learn_one,
    learn_set,
    obfuscate,
    proxy_actions,
    store_load,
    store_save,
)
from rah.alignment.store import dumps
from rah.core import Action, Interaction, Item, Personality, Source, is_reflected
from rah.llm.messages import TransportError
from rah.llm.oracle import OracleBackend, SyntheticUser, SyntheticWorld

from conftest import make_item, make_row

LIKE, DISLIKE = Action.LIKE, Action.DISLIKE


def test_variant_names():
    assert LoopConfig.from_variant("L+C").variant == "L+C"
    assert LoopConfig.from_variant("L").use_critic is False
    with pytest.raises(ValueError):
        LoopConfig.from_variant("C")
    with pytest.raises(ValueError):
        LoopConfig(max_iters=0)


def test_full_loop_recovers_the_synthetic_user(toy):
    world, oracle = toy
    rows = [make_row("u", i, world.human_action("u", i), ts) for ts, i in enumerate("abcd")]
    responder = lambda user, facet: world.user(user).answer(facet)  # noqa: E731
    cfg = LoopConfig.from_variant("L+C+R", answer_queries=True)
    p = learn_set("u", rows, world.catalog, cfg, oracle, responder)
    assert is_reflected(p)
    assert p.like_facets == {"comedy"}
    assert p.dislike_facets == {"horror"}
    got = [x.action for x in proxy_actions(p, [world.catalog[i] for i in "abcd"], oracle)]
    assert got == [x.action for x in rows]


def test_learn_only_keeps_every_entry(toy):
    world, oracle = toy
    rows = [make_row("u", "a", LIKE, 0), make_row("u", "c", DISLIKE, 1)]
    p = learn_set("u", rows, world.catalog, LoopConfig.from_variant("L"), oracle)
    assert len(p.entries) == 4
    assert p.like_facets & p.dislike_facets == {"comedy"}


def test_learn_one_rejects_foreign_rows(toy):
    world, oracle = toy
    with pytest.raises(ValueError):
        learn_one(make_row("v", "a", LIKE), world.catalog["a"], Personality("u"), LoopConfig(), oracle)
    with pytest.raises(ValueError):
        learn_one(make_row("u", "a", LIKE), world.catalog["b"], Personality("u"), LoopConfig(), oracle)


class Failing:
    identity = "failing"

    def complete(self, request):
        raise TransportError("down")


def test_learn_set_aborts_when_most_rows_fail(toy):
    world, _ = toy
    rows = [make_row("u", i, LIKE, ts) for ts, i in enumerate("ab")]
    with pytest.raises(RunError):
        learn_set("u", rows, world.catalog, LoopConfig(), Failing())


tags = st.sets(st.sampled_from("abcdefgh"), min_size=1, max_size=4)


@given(st.lists(st.tuples(tags, st.booleans()), min_size=1, max_size=12), st.integers(1, 4), st.sampled_from(["L", "L+C", "L+R", "L+C+R"]))
def test_loop_never_exceeds_max_iters(stream, max_iters, variant):
    catalog = {f"i{k}": make_item(f"i{k}", t) for k, (t, _) in enumerate(stream)}
    oracle = OracleBackend(SyntheticWorld(catalog, {}))
    cfg = LoopConfig.from_variant(variant, max_iters=max_iters)
    traces = []
    rows = [make_row("u", f"i{k}", LIKE if liked else DISLIKE, k) for k, (_, liked) in enumerate(stream)]
    learn_set("u", rows, catalog, cfg, oracle, on_trace=lambda x, t: traces.append(t))
    assert len(traces) == len(rows)
    for t in traces:
        assert 1 <= len(t.iterations) <= (max_iters if cfg.use_critic else 1)
        if t.converged:
            assert t.iterations[-1][2].passed


# --- store ----------------------------------------------------------------


def test_store_round_trip_and_errors(toy, tmp_path):
    world, oracle = toy
    p = learn_set("u", [make_row("u", "a", LIKE)], world.catalog, LoopConfig(), oracle)
    path = tmp_path / "lib" / "u.jsonl"
    store_save(p, path)
    assert store_load(path) == p
    text = path.read_text()
    path.write_text(text.rsplit("\n", 2)[0] + "\n")
    with pytest.raises(PersonalityDecodeError, match="truncated"):
        store_load(path)
    path.write_text(text.replace('"version": 1', '"version": 7'))
    with pytest.raises(MigrationError):
        store_load(path)
    path.write_text("")
    with pytest.raises(PersonalityDecodeError):
        store_load(path)
    assert dumps(Personality("nobody")).count("\n") == 1


# --- control ----------------------------------------------------------------


def test_filter_recommendations_three_way(toy):
    world, oracle = toy
    catalog = dict(world.catalog)
    catalog["e"] = make_item("e", {"comedy", "cartoon"})
    backend = OracleBackend(SyntheticWorld(catalog, {}))
    p = learn_set("u", [make_row("u", "a", LIKE, 0), make_row("u", "b", DISLIKE, 1)], catalog, LoopConfig(), backend)
    rules = IntentRules(exclude_facets=frozenset({"cartoon"}))
    out = filter_recommendations(p, rules, [catalog[i] for i in ("a", "d", "c", "e", "b")], backend)
    assert out.decisions == {
        "a": Decision.PASS_TO_USER,
        "d": Decision.PASS_TO_USER,
        "c": Decision.PASS_AND_OBSERVE,
        "e": Decision.PROXY_DISLIKE,
        "b": Decision.PROXY_DISLIKE,
    }
    assert [x.item for x in out.proxy_feedback] == ["e", "b"]
    assert all(x.source is Source.ASSISTANT_PROXY and x.action is DISLIKE for x in out.proxy_feedback)


def _privacy_catalog():
    items = {
        "dep": make_item("dep", {"depression", "psychology"}, "book"),
        "novel": make_item("novel", {"fiction"}, "book"),
    }
    for k in range(6):
        items[f"pro{k}"] = make_item(f"pro{k}", {"professional", "psychology"}, "book")
    for k in range(12):
        items[f"x{k}"] = make_item(f"x{k}", {f"topic{k % 4}"}, "book")
    return items


def test_psychologist_plan():
    catalog = _privacy_catalog()
    rules = IntentRules(sensitive_facets=frozenset({"depression"}))
    trigger = Interaction("t", "u", "dep", LIKE, timestamp=5)
    plan = obfuscate("u", trigger, Strategy.PSYCHOLOGIST, catalog, 0, rules, k=4)
    assert len(plan.extra_feedback) == 4
    assert all(x.source is Source.OBFUSCATION and x.action is LIKE for x in plan.extra_feedback)
    assert all("professional" in catalog[x.item].tags for x in plan.extra_feedback)
    assert plan == obfuscate("u", trigger, Strategy.PSYCHOLOGIST, catalog, 0, rules, k=4)
    # professional items vanish unless the user genuinely likes that facet
    assert plan.apply(["pro0", "novel"], catalog, {"fiction"}) == ["novel"]
    assert plan.apply(["pro0", "novel"], catalog, {"professional", "psychology"}) == ["pro0", "novel"]


def test_shared_account_plan_hides_its_own_traces():
    catalog = _privacy_catalog()
    rules = IntentRules(sensitive_facets=frozenset({"depression"}))
    trigger = Interaction("t", "u", "dep", LIKE)
    plan = obfuscate("u", trigger, Strategy.SHARED_ACCOUNT, catalog, 3, rules, m=8)
    assert len({x.item for x in plan.extra_feedback}) == 8
    assert "dep" not in {x.item for x in plan.extra_feedback}
    liked = {f for x in plan.extra_feedback if x.action is LIKE for f in catalog[x.item].tags}
    leaked = [i for i in catalog if catalog[i].tags & liked and not catalog[i].tags & {"fiction"}]
    assert plan.apply(leaked, catalog, {"fiction"}) == []


def test_obfuscation_needs_a_sensitive_trigger():
    catalog = _privacy_catalog()
    with pytest.raises(ObfuscationError):
        obfuscate("u", Interaction("t", "u", "novel", LIKE), Strategy.PSYCHOLOGIST, catalog, 0, IntentRules(sensitive_facets=frozenset({"depression"})))
    bare = {"dep": catalog["dep"]}
    with pytest.raises(ObfuscationError):
        obfuscate("u", Interaction("t", "u", "dep", LIKE), Strategy.PSYCHOLOGIST, bare, 0, IntentRules(sensitive_facets=frozenset({"depression"})))


def test_filter_rule_modes():
    it = make_item("z", {"professional", "psychology"})
    assert FilterRule(frozenset({"professional"}), "category").removes(it, frozenset())
    assert not FilterRule(frozenset({"professional"}), "category").removes(it, frozenset({"professional"}))
    assert not FilterRule(frozenset({"professional"})).removes(it, frozenset({"psychology"}))
    assert not FilterRule(frozenset({"other"})).removes(it, frozenset())
