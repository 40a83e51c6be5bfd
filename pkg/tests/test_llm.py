import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rah.agents import perceive
from rah.core import Action
from rah.llm import (
    AgentKind,
    AgentRequest,
    AgentResponse,
    CachedBackend,
    ConfigError,
    MalformedResponse,
    OracleBackend,
    RemoteBackend,
    RemoteConfig,
    TransportError,
    cache_key,
    load_templates,
    render,
)
from rah.llm.grammar import format_result, parse_result
from rah.llm.messages import stable_digest
from rah.llm.oracle import SyntheticUser, SyntheticWorld, act_score, reflect_merge

facet = st.text(alphabet="abcdefghijklmnop.-_", min_size=1, max_size=8).filter(lambda s: s.strip(".-_"))
facets = st.lists(facet, min_size=1, max_size=4, unique=True).map(sorted)


def _entries(polarity):
    verb = "likes" if polarity is Action.LIKE else "dislikes"
    return st.lists(facets.map(lambda fs: {"statement": f"{verb} {', '.join(fs)}", "facets": fs}), max_size=3)


@given(_entries(Action.LIKE), _entries(Action.DISLIKE), st.lists(st.text("abc ?", min_size=1, max_size=12), max_size=3))
def test_reflect_grammar_round_trip(likes, dislikes, queries):
    result = {"likes": likes, "dislikes": dislikes, "queries": [q for q in queries if q.strip()]}
    back = parse_result(AgentKind.REFLECT, format_result(AgentKind.REFLECT, result))
    assert back["likes"] == likes
    assert back["dislikes"] == dislikes
    assert back["queries"] == [" ".join(q.split()) for q in result["queries"]]


@given(st.sampled_from(["like", "dislike"]), st.booleans())
def test_act_grammar_round_trip(predicted, confident):
    result = {"reasons": "r", "perception": "p", "comment": "c", "predicted": predicted, "confident": confident}
    assert parse_result(AgentKind.ACT, format_result(AgentKind.ACT, result)) == result


def test_parser_tolerates_prose_and_case():
    text = "Sure, here you go.\nreasons: fits\nPerception: good\nCOMMENT: great\nPREDICTION: Liked it.\n"
    out = parse_result(AgentKind.ACT, text)
    assert out["predicted"] == "like" and out["confident"] is True


def test_parser_rejects_missing_keys_and_bad_values():
    with pytest.raises(MalformedResponse):
        parse_result(AgentKind.ACT, "REASONS: x\nPERCEPTION: y\n")
    with pytest.raises(MalformedResponse):
        parse_result(AgentKind.ACT, "REASONS: x\nPERCEPTION: y\nCOMMENT: z\nPREDICTION: maybe\n")
    with pytest.raises(MalformedResponse):
        parse_result(AgentKind.PERCEIVE, "DESCRIPTION: x\nATTRIBUTES: none\n")


def test_request_validates_payload():
    with pytest.raises(ValueError):
        AgentRequest(AgentKind.ACT, {"item": {}})


def test_act_score_and_user_truth():
    assert act_score({"a", "b", "c"}, {"a", "b"}, {"c"}) == 1
    u = SyntheticUser(frozenset({"a"}), frozenset({"b"}))
    assert u.true_action({"a"}) is Action.LIKE
    # equal pull goes to Dislike
    assert u.true_action({"a", "b"}) is Action.DISLIKE
    assert u.answer("a") is Action.LIKE and u.answer("z") is None
    with pytest.raises(ValueError):
        SyntheticUser(frozenset({"a"}), frozenset({"a"}))


def test_reflect_merge_splits_conflicts():
    entries = [
        {"polarity": "like", "statement": "likes a, b", "facets": ["a", "b"]},
        {"polarity": "dislike", "statement": "dislikes a", "facets": ["a"]},
        {"polarity": "like", "statement": "likes a, b", "facets": ["a", "b"]},
    ]
    out = reflect_merge(entries)
    assert out["likes"] == [{"statement": "likes b", "facets": ["b"]}]
    assert out["dislikes"] == []
    assert out["queries"] == ["Do you like or dislike a?"]


def test_world_round_trip_and_noise_is_seeded(toy):
    world, _ = toy
    again = SyntheticWorld.loads(world.dumps())
    assert again.to_dict() == world.to_dict()
    assert again.digest() == world.digest()
    noisy = SyntheticWorld(world.catalog, {"u": SyntheticUser(frozenset({"comedy"}), frozenset({"horror"}), 0.5)}, seed=4)
    first = [noisy.human_action("u", i) for i in sorted(world.catalog)]
    assert first == [noisy.human_action("u", i) for i in sorted(world.catalog)]


# --- cache ---------------------------------------------------------------


class Counting:
    identity = "counting"

    def __init__(self, inner):
        self.inner, self.calls = inner, 0

    def complete(self, request):
        self.calls += 1
        return self.inner.complete(request)


def test_cache_hits_and_survives_corruption(toy, tmp_path):
    world, oracle = toy
    inner = Counting(oracle)
    cached = CachedBackend(inner, tmp_path)
    a = perceive(world.catalog["a"], cached)
    b = perceive(world.catalog["a"], cached)
    assert a == b and inner.calls == 1 and cached.hits == 1
    request = AgentRequest(AgentKind.PERCEIVE, {"item": world.catalog["a"].to_dict()})
    path = cached.path_for(cache_key(request, inner.identity))
    assert path.exists()
    path.write_text("{not json", encoding="utf-8")
    assert perceive(world.catalog["a"], cached) == a
    assert inner.calls == 2
    assert json.loads(path.read_text())["kind"] == "perceive"


def test_cache_key_depends_on_backend_and_decode(toy):
    world, _ = toy
    req = AgentRequest(AgentKind.PERCEIVE, {"item": world.catalog["a"].to_dict()})
    assert cache_key(req, "x") != cache_key(req, "y")
    assert cache_key(req, "x") == stable_digest({**req.canonical(), "backend": "x"})


# --- remote backend over a fake transport --------------------------------


def _envelope(text):
    return {"choices": [{"message": {"content": text}}]}


def test_remote_parses_and_retries_on_malformed(toy):
    world, oracle = toy
    req = AgentRequest(AgentKind.PERCEIVE, {"item": world.catalog["c"].to_dict()})
    good = oracle.complete(req).raw_text
    replies = iter(["I think it's a nice film.", good])
    seen = []

    def transport(url, headers, body):
        seen.append(body["messages"])
        return _envelope(next(replies))

    backend = RemoteBackend(RemoteConfig("http://llm", "k"), transport=transport, sleep=lambda s: None)
    resp = backend.complete(req)
    assert resp.result == oracle.complete(req).result
    assert resp.retry_count == 1
    # the retry carries the bad reply and a format reminder
    assert len(seen[1]) == 3 and seen[1][1]["role"] == "assistant"
    assert "Item (movie): C" in seen[0][0]["content"]


def test_remote_gives_up_after_parse_retries(toy):
    world, _ = toy
    req = AgentRequest(AgentKind.PERCEIVE, {"item": world.catalog["c"].to_dict()})
    backend = RemoteBackend(
        RemoteConfig("http://llm", "k", max_parse_retries=2), transport=lambda *a: _envelope("nope"), sleep=lambda s: None
    )
    with pytest.raises(MalformedResponse):
        backend.complete(req)


def test_remote_backs_off_on_transport_errors(toy):
    world, oracle = toy
    req = AgentRequest(AgentKind.PERCEIVE, {"item": world.catalog["a"].to_dict()})
    attempts, sleeps = [], []

    def flaky(url, headers, body):
        attempts.append(url)
        if len(attempts) < 3:
            raise TransportError("503")
        return _envelope(oracle.complete(req).raw_text)

    backend = RemoteBackend(RemoteConfig("http://llm/v1", "k", backoff=0.5), transport=flaky, sleep=sleeps.append)
    backend.complete(req)
    assert attempts[0] == "http://llm/v1/chat/completions"
    assert sleeps == [0.5, 1.0]

    def down(url, headers, body):
        raise TransportError("down")

    with pytest.raises(TransportError):
        RemoteBackend(RemoteConfig("http://llm", "k", max_transport_attempts=2), transport=down, sleep=lambda s: None).complete(req)


def test_remote_config_errors():
    with pytest.raises(ConfigError):
        RemoteConfig.from_env({})
    cfg = RemoteConfig.from_env({"RAH_LLM_ENDPOINT": "http://x", "RAH_LLM_API_KEY": "k", "RAH_LLM_MODEL": "m"})
    assert cfg.model == "m"
    with pytest.raises(ConfigError):
        render("Hello {{name}} from {{place}}", {"name": "a"})
    assert render("Hello {{ name }}", {"name": "a"}) == "Hello a"


def test_bundled_templates_cover_every_agent():
    templates = load_templates()
    assert set(templates) == set(AgentKind)


def test_response_dict_round_trip():
    r = AgentResponse(AgentKind.CRITIC, {"reasons": ["x"]}, "REASONS: x", "oracle", 2)
    assert AgentResponse.from_dict(r.to_dict()) == r
