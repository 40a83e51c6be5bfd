import pytest
from hypothesis import settings

from rah.core import Action, Interaction, Item
from rah.data.world import WorldConfig, make_world
from rah.llm.oracle import OracleBackend, SyntheticUser, SyntheticWorld

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")


def make_item(iid, tags, domain="movie"):
    return Item(iid, domain, iid.title(), "", frozenset(tags))


def make_row(user, item, action, ts=0, rid=None):
    return Interaction(rid or f"{user}|{item}|{ts}", user, item, action, timestamp=ts)


@pytest.fixture
def small_world():
    return make_world(WorldConfig(n_users=6, n_items=60, per_domain=8, n_background=4, seed=3))


@pytest.fixture
def toy():
    """Four items over three facets and one user who likes comedy and dislikes horror."""
    catalog = {
        "a": make_item("a", {"comedy", "family"}),
        "b": make_item("b", {"horror"}),
        "c": make_item("c", {"comedy", "horror"}),
        "d": make_item("d", {"family"}),
    }
    user = SyntheticUser(frozenset({"comedy"}), frozenset({"horror"}))
    world = SyntheticWorld(catalog, {"u": user})
    return world, OracleBackend(world)


LIKE, DISLIKE = Action.LIKE, Action.DISLIKE
