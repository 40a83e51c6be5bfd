"""Line-delimited review ingestion and interaction files.

Each input line is a JSON object. Canonical field names are ``user``, ``item``,
``domain``, ``rating``, ``timestamp`` and ``text``; the public Amazon dump names
(``reviewerID``, ``asin``, ``overall``, ``unixReviewTime``, ``reviewText``) are
accepted as aliases. A file may be given as ``domain=path`` when its records
carry no domain field.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from ..core import Interaction, Item, Source, ValidationError, action_from_rating, domain_tag

logger = logging.getLogger(__name__)

ALIASES = {
    "user": ("user", "reviewerID", "user_id"),
    "item": ("item", "asin", "item_id", "parent_asin"),
    "domain": ("domain",),
    "rating": ("rating", "overall"),
    "timestamp": ("timestamp", "unixReviewTime"),
    "text": ("text", "reviewText"),
}


@dataclass(frozen=True)
class RawReview:
    user: str
    item: str
    domain: str
    rating: int
    timestamp: int
    text: str = ""


@dataclass
class IngestResult:
    interactions: list[Interaction] = field(default_factory=list)
    catalog: dict[str, Item] = field(default_factory=dict)
    skipped: int = 0
    neutral: int = 0
    duplicates: int = 0

    @property
    def item_domain(self) -> dict[str, str]:
        return {iid: it.domain for iid, it in self.catalog.items()}


def _field(record: Mapping, name: str):
    for alias in ALIASES[name]:
        if alias in record and record[alias] is not None:
            return record[alias]
    return None


def parse_review(line: str, default_domain: str | None = None) -> RawReview:
    record = json.loads(line)
    if not isinstance(record, dict):
        raise ValidationError("record is not an object")
    user, item = _field(record, "user"), _field(record, "item")
    domain = _field(record, "domain") or default_domain
    rating, ts = _field(record, "rating"), _field(record, "timestamp")
    if not user or not item or not domain or rating is None or ts is None:
        raise ValidationError("record lacks a required field")
    rating_f = float(rating)
    if rating_f != int(rating_f):
        raise ValidationError(f"fractional rating {rating!r}")
    return RawReview(str(user), str(item), domain_tag(str(domain).lower()), int(rating_f), int(ts), str(_field(record, "text") or ""))


def interaction_id(review: RawReview) -> str:
    return f"{review.user}|{review.item}|{review.timestamp}"


def _split_spec(spec) -> tuple[str | None, Path]:
    if isinstance(spec, tuple):
        return spec[0], Path(spec[1])
    text = str(spec)
    if "=" in text and not Path(text).exists():
        domain, path = text.split("=", 1)
        return domain, Path(path)
    return None, Path(text)


def ingest(paths: Iterable, titles: Mapping[str, Mapping] | None = None) -> IngestResult:
    """Read review files into Human interactions; 3-star reviews carry no polarity and are dropped.

    ``titles`` optionally maps item id -> {"title", "description", "tags"} metadata.
    """
    result = IngestResult()
    seen: set[tuple] = set()
    ids: set[str] = set()
    titles = titles or {}
    for spec in paths:
        default_domain, path = _split_spec(spec)
        try:
            handle = path.open(encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot read {path}: {exc}") from exc
        with handle:
            for lineno, line in enumerate(handle, 1):
                if not line.strip():
                    continue
                try:
                    review = parse_review(line, default_domain)
                    action = action_from_rating(review.rating)
                except (ValueError, TypeError) as exc:
                    result.skipped += 1
                    logger.debug("%s:%d skipped: %s", path, lineno, exc)
                    continue
                key = (review.user, review.item, review.timestamp, review.rating, review.text)
                if key in seen:
                    result.duplicates += 1
                    continue
                seen.add(key)
                if review.item not in result.catalog:
                    meta = titles.get(review.item, {})
                    result.catalog[review.item] = Item(
                        review.item,
                        review.domain,
                        meta.get("title", review.item),
                        meta.get("description", ""),
                        frozenset(meta.get("tags", ())),
                    )
                if action is None:
                    result.neutral += 1
                    continue
                iid = interaction_id(review)
                if iid in ids:
                    result.duplicates += 1
                    continue
                ids.add(iid)
                result.interactions.append(
                    Interaction(iid, review.user, review.item, action, review.rating, review.text or None, review.timestamp, Source.HUMAN)
                )
    if result.skipped:
        logger.info("skipped %d malformed records", result.skipped)
    result.interactions.sort(key=lambda x: (x.timestamp, x.user, x.item))
    return result


def write_interactions(interactions: Iterable[Interaction], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for x in interactions:
            fh.write(json.dumps(x.to_dict(), sort_keys=True) + "\n")


def read_interactions(path: str | Path) -> list[Interaction]:
    with Path(path).open(encoding="utf-8") as fh:
        return [Interaction.from_dict(json.loads(ln)) for ln in fh if ln.strip()]


def write_catalog(catalog: Mapping[str, Item], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for iid in sorted(catalog):
            fh.write(json.dumps(catalog[iid].to_dict(), sort_keys=True) + "\n")


def read_catalog(path: str | Path) -> dict[str, Item]:
    with Path(path).open(encoding="utf-8") as fh:
        items = [Item.from_dict(json.loads(ln)) for ln in fh if ln.strip()]
    return {it.id: it for it in items}
