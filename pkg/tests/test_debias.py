import random
from collections import Counter
from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rah.alignment import LoopConfig, learn_set
from rah.core import Action, Interaction, Personality, Source
from rah.debias import (
    augment_unpopular,
    estimate_propensity,
    inclusion_weights,
    ips_weights,
    review_counts,
    sample_unbiased_test,
)
from rah.llm.oracle import OracleBackend, SyntheticWorld

from conftest import make_item


def rows_for(counts):
    return [Interaction(f"{item}#{k}", f"v{k}", item, Action.LIKE) for item, n in counts.items() for k in range(n)]


def successive_inclusion(weights, size):
    """Exact inclusion probabilities of draw-proportional-to-weight without replacement, by enumeration."""
    w = [Fraction(x) for x in weights]
    incl = [Fraction(0)] * len(w)
    for seq in permutations(range(len(w)), size):
        p, left = Fraction(1), sum(w)
        for k in seq:
            p *= w[k] / left
            left -= w[k]
        for k in seq:
            incl[k] += p
    return [float(x) for x in incl]


def test_propensity_formula_and_clip():
    table = estimate_propensity(rows_for({"a": 100, "b": 25, "c": 1}), gamma=0.5, clip=0.2, catalog=["a", "b", "c", "z"])
    assert table["a"] == 1.0
    assert table["b"] == pytest.approx(0.5)
    assert table["c"] == 0.2 and table["z"] == 0.2
    assert table.counts["z"] == 0
    assert table.dumps().splitlines()[0] == "a\t1"


@given(st.dictionaries(st.sampled_from("abcdefghij"), st.integers(1, 500), min_size=1), st.floats(0, 2), st.floats(0.001, 1))
def test_ips_identity_and_weight_bound(counts, gamma, clip):
    table = estimate_propensity(rows_for(counts), gamma, clip)
    w = ips_weights(table)
    for iid, p in table.propensity.items():
        assert w[iid] * p == 1.0 or abs(w[iid] * p - 1.0) <= 1e-15
        assert w[iid] <= 1.0 / clip * (1 + 1e-12)


def test_default_clip_caps_weights_at_100():
    table = estimate_propensity(rows_for({"a": 5000, "b": 1}), catalog=["a", "b", "c"])
    assert max(ips_weights(table).values()) == pytest.approx(100.0)


def test_gamma_zero_gives_uniform_weights():
    table = estimate_propensity(rows_for({"a": 50, "b": 3}), gamma=0.0)
    assert set(ips_weights(table).values()) == {1.0}


def test_propensity_rejects_bad_arguments():
    with pytest.raises(ValueError):
        estimate_propensity([], 1.0, 0.01)
    with pytest.raises(ValueError):
        estimate_propensity(rows_for({"a": 1}), 1.0, 0.0)
    with pytest.raises(ValueError):
        estimate_propensity(rows_for({"a": 1}), -1.0, 0.1)


def test_two_row_inclusion_example():
    rows = [Interaction("x", "u", "pop", Action.LIKE), Interaction("y", "u", "rare", Action.LIKE)]
    counts = {"pop": 8, "rare": 2}
    w = inclusion_weights(rows, counts)
    assert list(w / w.sum()) == pytest.approx([0.2, 0.8])
    hits = Counter(sample_unbiased_test(rows, 1, s, counts)[0].id for s in range(4000))
    assert hits["y"] / 4000 == pytest.approx(0.8, abs=0.02)


def test_sampler_is_seeded_and_validates_size():
    rows = rows_for({"a": 3, "b": 1})
    assert sample_unbiased_test(rows, 2, 5) == sample_unbiased_test(list(reversed(rows)), 2, 5)
    assert sample_unbiased_test(rows, 0, 1) == []
    with pytest.raises(ValueError):
        sample_unbiased_test(rows, 5, 0)


def test_enumeration_oracle_single_draw():
    assert successive_inclusion([1, 3], 1) == pytest.approx([0.25, 0.75])
    assert successive_inclusion([1, 1, 1], 2) == pytest.approx([2 / 3] * 3)


def _assistants(catalog, users):
    backend = OracleBackend(SyntheticWorld(catalog, {}))
    lib = {}
    for u in users:
        seed_row = Interaction(f"{u}-seed", u, "seed", Action.LIKE)
        lib[u] = learn_set(u, [seed_row], catalog, LoopConfig(), backend)
    return lib, backend


def test_augment_tops_up_every_item():
    catalog = {f"i{k}": make_item(f"i{k}", {f"g{k % 3}"}) for k in range(8)}
    catalog["seed"] = make_item("seed", {"g0"})
    users = [f"a{k}" for k in range(6)]
    lib, backend = _assistants(catalog, users)
    rng = random.Random(1)
    rows = [Interaction(f"r{k}", rng.choice(users), f"i{rng.randrange(8)}", Action.LIKE) for k in range(12)]
    rows = list({(x.user, x.item): x for x in rows}.values())
    extra = augment_unpopular(catalog, rows, lib, backend, threshold=4, seed=2)
    counts = review_counts(rows + extra, catalog)
    assert min(counts.values()) >= 4
    assert all(counts[i] == 4 for i in catalog if review_counts(rows, catalog)[i] < 4)
    assert all(x.source is Source.ASSISTANT_PROXY for x in extra)
    taken = {(x.user, x.item) for x in rows}
    assert not {(x.user, x.item) for x in extra} & taken
    assert len({(x.user, x.item) for x in extra}) == len(extra)
    shuffled = dict(sorted(catalog.items(), reverse=True))
    assert augment_unpopular(shuffled, list(reversed(rows)), lib, backend, 4, 2) == extra
    with pytest.raises(ValueError):
        augment_unpopular(catalog, rows, lib, backend, threshold=7, seed=2)
    assert augment_unpopular(catalog, rows, lib, backend, threshold=0, seed=2) == []
