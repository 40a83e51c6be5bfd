"""Line-oriented ``KEY: value`` response grammar, one fixed key set per agent kind.

List values are comma separated, trait entries are ``;`` separated and written
as ``statement [facet, facet]`` (a bare facet is accepted), queries are ``|``
separated. ``none`` denotes an empty list.
"""

from __future__ import annotations

import re
from typing import Any, Mapping

from ..core import Action, facet_statement
from .messages import AgentKind, MalformedResponse

KEYS: dict[AgentKind, tuple[str, ...]] = {
    AgentKind.PERCEIVE: ("DESCRIPTION", "ATTRIBUTES"),
    AgentKind.LEARN: ("WHY_LIKE", "WHY_DISLIKE", "LIKES", "DISLIKES"),
    AgentKind.ACT: ("REASONS", "PERCEPTION", "COMMENT", "PREDICTION", "CONFIDENCE"),
    AgentKind.CRITIC: ("REASONS", "SUGGESTIONS", "FLAGGED"),
    AgentKind.REFLECT: ("LIKES", "DISLIKES", "QUERIES"),
}
OPTIONAL_KEYS = {(AgentKind.ACT, "CONFIDENCE")}

_LINE = re.compile(r"^\s*([A-Za-z_]+)\s*:\s*(.*)$")
_ENTRY = re.compile(r"^(.*?)\s*\[(.*)\]\s*$")


def _clean(text: str, forbidden: str = "") -> str:
    out = " ".join(str(text).split())
    for ch in forbidden:
        out = out.replace(ch, " ")
    return " ".join(out.split())


def _fmt_list(values, sep: str = ", ") -> str:
    values = [_clean(v, ",;|[]") for v in values]
    values = [v for v in values if v]
    return sep.join(values) if values else "none"


def _parse_list(value: str, sep: str = ",") -> list[str]:
    if value.strip().lower() in ("", "none", "n/a", "-"):
        return []
    return [v.strip() for v in value.split(sep) if v.strip()]


def _fmt_entries(entries, polarity: Action) -> str:
    parts = []
    for e in entries:
        statement = _clean(e["statement"], ";[]")
        facets = ", ".join(_clean(f, ",;|[]") for f in e["facets"])
        parts.append(f"{statement} [{facets}]")
    return "; ".join(parts) if parts else "none"


def _parse_entries(value: str, polarity: Action) -> list[dict[str, Any]]:
    out = []
    for chunk in _parse_list(value, ";"):
        m = _ENTRY.match(chunk)
        if m:
            statement = m.group(1).strip()
            facets = sorted({f.strip().lower() for f in m.group(2).split(",") if f.strip()})
        else:
            facets = [chunk.strip().lower()]
            statement = ""
        if not facets:
            continue
        out.append({"statement": statement or facet_statement(polarity, facets), "facets": facets})
    return out


def format_result(kind: AgentKind, result: Mapping[str, Any]) -> str:
    if kind is AgentKind.PERCEIVE:
        fields = {
            "DESCRIPTION": _clean(result["description"]),
            "ATTRIBUTES": _fmt_list(result["attributes"]),
        }
    elif kind is AgentKind.LEARN:
        fields = {
            "WHY_LIKE": _clean(result["why_like"]),
            "WHY_DISLIKE": _clean(result["why_dislike"]),
            "LIKES": _fmt_entries(result["likes"], Action.LIKE),
            "DISLIKES": _fmt_entries(result["dislikes"], Action.DISLIKE),
        }
    elif kind is AgentKind.ACT:
        fields = {
            "REASONS": _clean(result["reasons"]),
            "PERCEPTION": _clean(result["perception"]),
            "COMMENT": _clean(result["comment"]),
            "PREDICTION": result["predicted"],
            "CONFIDENCE": "high" if result["confident"] else "low",
        }
    elif kind is AgentKind.CRITIC:
        fields = {
            "REASONS": _fmt_list(result["reasons"], " | "),
            "SUGGESTIONS": _fmt_list(result["suggestions"], " | "),
            "FLAGGED": _fmt_list(result["flagged"]),
        }
    else:
        fields = {
            "LIKES": _fmt_entries(result["likes"], Action.LIKE),
            "DISLIKES": _fmt_entries(result["dislikes"], Action.DISLIKE),
            "QUERIES": _fmt_list(result["queries"], " | "),
        }
    return "\n".join(f"{k}: {v}" for k, v in fields.items()) + "\n"


def split_fields(kind: AgentKind, text: str) -> dict[str, str]:
    known = set(KEYS[kind])
    fields: dict[str, str] = {}
    current = None
    for line in text.splitlines():
        m = _LINE.match(line)
        if m and m.group(1).upper() in known:
            current = m.group(1).upper()
            fields[current] = m.group(2).strip()
        elif current is not None and line.strip():
            fields[current] = (fields[current] + " " + line.strip()).strip()
    missing = [k for k in KEYS[kind] if k not in fields and (kind, k) not in OPTIONAL_KEYS]
    if missing:
        raise MalformedResponse(f"{kind.value} response missing keys {missing}")
    return fields


def _parse_action(value: str) -> str:
    word = re.sub(r"[^a-z]", "", value.strip().lower().split()[0]) if value.strip() else ""
    if word in ("like", "liked", "likes"):
        return Action.LIKE.value
    if word in ("dislike", "disliked", "dislikes"):
        return Action.DISLIKE.value
    raise MalformedResponse(f"unparseable prediction {value!r}")


def parse_result(kind: AgentKind, text: str) -> dict[str, Any]:
    """Parse raw backend text into the kind's structured result or raise MalformedResponse."""
    f = split_fields(kind, text)
    if kind is AgentKind.PERCEIVE:
        attributes = sorted({a.lower() for a in _parse_list(f["ATTRIBUTES"])})
        if not attributes:
            raise MalformedResponse("perceive response has no attributes")
        return {"description": f["DESCRIPTION"], "attributes": attributes}
    if kind is AgentKind.LEARN:
        return {
            "why_like": f["WHY_LIKE"],
            "why_dislike": f["WHY_DISLIKE"],
            "likes": _parse_entries(f["LIKES"], Action.LIKE),
            "dislikes": _parse_entries(f["DISLIKES"], Action.DISLIKE),
        }
    if kind is AgentKind.ACT:
        confidence = f.get("CONFIDENCE", "high").strip().lower()
        if confidence not in ("high", "low"):
            raise MalformedResponse(f"unparseable confidence {confidence!r}")
        return {
            "reasons": f["REASONS"],
            "perception": f["PERCEPTION"],
            "comment": f["COMMENT"],
            "predicted": _parse_action(f["PREDICTION"]),
            "confident": confidence == "high",
        }
    if kind is AgentKind.CRITIC:
        return {
            "reasons": _parse_list(f["REASONS"], "|"),
            "suggestions": _parse_list(f["SUGGESTIONS"], "|"),
            "flagged": sorted({x.lower() for x in _parse_list(f["FLAGGED"])}),
        }
    return {
        "likes": _parse_entries(f["LIKES"], Action.LIKE),
        "dislikes": _parse_entries(f["DISLIKES"], Action.DISLIKE),
        "queries": _parse_list(f["QUERIES"], "|"),
    }
