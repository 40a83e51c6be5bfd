"""Personality library files.

One JSON header line (format, version, user, entry count) followed by one JSON
line per trait entry. Each user's file has a single writer; concurrent readers
are fine because saves replace the file atomically.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from ..core import Personality, TraitEntry

FORMAT = "rah-personality"
VERSION = 1


class PersonalityDecodeError(ValueError):
    pass


class MigrationError(PersonalityDecodeError):
    pass


def dumps(personality: Personality) -> str:
    header = {"format": FORMAT, "version": VERSION, "user": personality.user, "entries": len(personality.entries)}
    lines = [json.dumps(header, sort_keys=True)]
    lines += [json.dumps(e.to_dict(), sort_keys=True) for e in personality.entries]
    return "\n".join(lines) + "\n"


def loads(text: str) -> Personality:
    lines = text.splitlines()
    if not lines:
        raise PersonalityDecodeError("empty personality file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise PersonalityDecodeError(f"bad header: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != FORMAT:
        raise PersonalityDecodeError("not a personality library file")
    if header.get("version") != VERSION:
        raise MigrationError(f"personality file version {header.get('version')!r}; this build reads {VERSION}")
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != header.get("entries"):
        raise PersonalityDecodeError(f"expected {header.get('entries')} entries, found {len(body)} (truncated?)")
    try:
        entries = tuple(TraitEntry.from_dict(json.loads(ln)) for ln in body)
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise PersonalityDecodeError(f"bad entry: {exc}") from exc
    return Personality(header["user"], entries)


def store_save(personality: Personality, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(dumps(personality))
    os.replace(tmp, path)


def store_load(path: str | Path) -> Personality:
    return loads(Path(path).read_text(encoding="utf-8"))
