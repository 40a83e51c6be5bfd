"""Per-user Learn/Proxy/Unseen assignment and its on-disk form."""

from __future__ import annotations

import random
from collections import defaultdict
from pathlib import Path
from typing import Iterable

from ..core import Interaction, SplitAssignment, SplitName

ORDER = (SplitName.LEARN, SplitName.PROXY, SplitName.UNSEEN)


def split_lpu(interactions: Iterable[Interaction], seed: int) -> SplitAssignment:
    """Shuffle each user's interactions (seeded per user) and deal them round-robin.

    Leftovers go Learn first, then Proxy, so set sizes differ by at most one.
    """
    per_user: dict[str, list[str]] = defaultdict(list)
    for x in interactions:
        per_user[x.user].append(x.id)
    assignment: dict[str, SplitName] = {}
    owners: dict[str, str] = {}
    for user in sorted(per_user):
        ids = sorted(per_user[user])
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate interaction ids for user {user}")
        random.Random(f"{seed}:{user}").shuffle(ids)
        for pos, iid in enumerate(ids):
            assignment[iid] = ORDER[pos % 3]
            owners[iid] = user
    return SplitAssignment(assignment, owners)


def partition(interactions: Iterable[Interaction], split: SplitAssignment) -> dict[SplitName, list[Interaction]]:
    out: dict[SplitName, list[Interaction]] = {s: [] for s in SplitName}
    for x in interactions:
        try:
            out[split.assignment[x.id]].append(x)
        except KeyError:
            raise KeyError(f"interaction {x.id} has no split assignment") from None
    return out


def dumps_split(split: SplitAssignment) -> str:
    lines = [f"{iid}\t{split.owners[iid]}\t{name.value}" for iid, name in sorted(split.assignment.items())]
    return "".join(line + "\n" for line in lines)


def loads_split(text: str) -> SplitAssignment:
    assignment, owners = {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"split line {lineno}: expected 3 tab-separated fields")
        iid, user, name = parts
        assignment[iid] = SplitName(name)
        owners[iid] = user
    return SplitAssignment(assignment, owners)


def write_split(split: SplitAssignment, path: str | Path) -> None:
    Path(path).write_text(dumps_split(split), encoding="utf-8")


def read_split(path: str | Path) -> SplitAssignment:
    return loads_split(Path(path).read_text(encoding="utf-8"))
