import json
import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rah.core import Action, Interaction, SplitName
from rah.data import (
    WorldConfig,
    ingest,
    kcore_filter,
    make_world,
    partition,
    read_catalog,
    read_interactions,
    read_split,
    retain_cross_domain,
    split_lpu,
    stats,
    write_catalog,
    write_interactions,
    write_split,
)
from rah.data.ingest import parse_review
from rah.data.split import dumps_split, loads_split

from kcore_oracle import brute_kcore, random_bipartite


def _write(path, records):
    path.write_text("".join((r if isinstance(r, str) else json.dumps(r)) + "\n" for r in records))


def test_ingest_aliases_neutral_duplicates_and_junk(tmp_path):
    movies = tmp_path / "movies.jsonl"
    _write(
        movies,
        [
            {"reviewerID": "A", "asin": "m1", "overall": 5.0, "unixReviewTime": 20, "reviewText": "great"},
            {"reviewerID": "A", "asin": "m1", "overall": 5.0, "unixReviewTime": 20, "reviewText": "great"},
            {"reviewerID": "B", "asin": "m1", "overall": 3, "unixReviewTime": 5},
            {"reviewerID": "B", "asin": "m2", "overall": 1, "unixReviewTime": 7},
            {"reviewerID": "C", "asin": "m2", "overall": 4.5, "unixReviewTime": 9},
            {"asin": "m3", "overall": 5, "unixReviewTime": 1},
            "not json",
            "",
        ],
    )
    books = tmp_path / "books.jsonl"
    _write(books, [{"user": "A", "item": "b1", "domain": "Book", "rating": 2, "timestamp": 1}])
    res = ingest([f"movie={movies}", books], titles={"m1": {"title": "Heat", "tags": ["crime"]}})
    assert [(x.user, x.item, x.action) for x in res.interactions] == [
        ("A", "b1", Action.DISLIKE),
        ("B", "m2", Action.DISLIKE),
        ("A", "m1", Action.LIKE),
    ]
    assert (res.skipped, res.neutral, res.duplicates) == (3, 1, 1)
    assert res.catalog["m1"].title == "Heat" and res.catalog["m1"].tags == {"crime"}
    assert res.item_domain == {"m1": "movie", "m2": "movie", "b1": "book"}
    assert res.interactions[0].id == "A|b1|1"


def test_parse_review_requires_fields():
    with pytest.raises(ValueError):
        parse_review('{"user": "a", "item": "b", "rating": 5}', "movie")
    with pytest.raises(ValueError):
        parse_review("[1, 2]", "movie")


def test_interaction_and_catalog_files_round_trip(tmp_path, small_world):
    world, panel, _ = small_world
    write_interactions(panel, tmp_path / "x.jsonl")
    write_catalog(world.catalog, tmp_path / "c.jsonl")
    assert read_interactions(tmp_path / "x.jsonl") == panel
    assert read_catalog(tmp_path / "c.jsonl") == dict(world.catalog)


def test_kcore_matches_brute_force_on_random_graphs():
    rng = random.Random(11)
    for _ in range(30):
        rows = random_bipartite(rng)
        k = rng.randint(1, 5)
        assert kcore_filter(rows, k) == brute_kcore(rows, k)


def test_kcore_known_case():
    rows = [Interaction(f"{u}{i}", u, i, Action.LIKE) for u, i in ["ax", "ay", "bx", "by", "cz"]]
    assert [x.id for x in kcore_filter(rows, 2)] == ["ax", "ay", "bx", "by"]
    with pytest.raises(ValueError):
        kcore_filter(rows, 0)


def test_cross_domain_and_stats():
    dom = {"m1": "movie", "m2": "movie", "b1": "book"}
    rows = [
        Interaction("1", "a", "m1", Action.LIKE),
        Interaction("2", "a", "b1", Action.LIKE),
        Interaction("3", "b", "m2", Action.DISLIKE),
    ]
    kept = retain_cross_domain(rows, dom)
    assert [x.id for x in kept] == ["1", "2"]
    s = stats(rows, dom)
    assert s.rows() == [("book", 1, 1, 1), ("movie", 2, 2, 2)]
    assert (s.total.users, s.total.items, s.total.interactions) == (3, 3, 3)


@given(st.dictionaries(st.sampled_from("abcdef"), st.integers(0, 40), min_size=1), st.integers(0, 10**6))
def test_split_is_a_balanced_partition(sizes, seed):
    rows = [Interaction(f"{u}-{k}", u, f"i{k}", Action.LIKE) for u, n in sizes.items() for k in range(n)]
    split = split_lpu(rows, seed)
    parts = partition(rows, split)
    assert sorted(x.id for p in parts.values() for x in p) == sorted(x.id for x in rows)
    for user, n in sizes.items():
        counts = split.sizes(user)
        assert sum(counts.values()) == n
        assert max(counts.values()) - min(counts.values()) <= 1
        assert counts[SplitName.LEARN] >= counts[SplitName.PROXY] >= counts[SplitName.UNSEEN]
    assert split_lpu(rows, seed) == split
    assert loads_split(dumps_split(split)) == split


def test_split_file_round_trip_and_errors(tmp_path):
    rows = [Interaction(f"x{k}", "u", f"i{k}", Action.LIKE) for k in range(5)]
    split = split_lpu(rows, 1)
    write_split(split, tmp_path / "s.tsv")
    assert read_split(tmp_path / "s.tsv") == split
    with pytest.raises(ValueError):
        loads_split("a\tb\n")
    with pytest.raises(ValueError):
        split_lpu(rows + rows[:1], 0)
    with pytest.raises(KeyError):
        partition([Interaction("new", "u", "i", Action.LIKE)], split)


def test_world_is_deterministic_and_consistent():
    cfg = WorldConfig(n_users=5, n_items=60, per_domain=6, n_background=3, noise_rate=0.2, seed=9)
    w1, p1, b1 = make_world(cfg)
    w2, p2, b2 = make_world(cfg)
    assert w1.dumps() == w2.dumps() and p1 == p2 and b1 == b2
    assert len(p1) == 5 * 6 * 3 and len(b1) == 3 * 6 * 3
    for x in p1 + b1:
        assert x.action is w1.human_action(x.user, x.item)
        assert x.rating == (5 if x.action is Action.LIKE else 1)
    per_user = Counter((x.user, w1.catalog[x.item].domain) for x in p1)
    assert set(per_user.values()) == {6}
    assert len({x.id for x in p1}) == len(p1)
    assert make_world(WorldConfig(n_users=5, n_items=60, per_domain=6, seed=10))[0].dumps() != w1.dumps()


def test_zipf_world_is_skewed():
    flat = make_world(WorldConfig(n_users=40, per_domain=20, seed=0))[1]
    skew = make_world(WorldConfig(n_users=40, per_domain=20, zipf=1.0, seed=0))[1]
    top = lambda rows: max(Counter(x.item for x in rows).values())  # noqa: E731
    assert top(skew) > top(flat)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_users": 0},
        {"liked_per_user": 3, "disliked_per_user": 3},
        {"per_domain": 101},
        {"noise_rate": 1.0},
        {"zipf": -1.0},
        {"domains": ()},
    ],
)
def test_world_config_rejects(kwargs):
    with pytest.raises(ValueError):
        WorldConfig(**kwargs)


def test_preference_sparsity():
    assert WorldConfig().preference_sparsity == pytest.approx(0.4)
