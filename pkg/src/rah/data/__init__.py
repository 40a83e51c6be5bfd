from .ingest import IngestResult, RawReview, ingest, read_catalog, read_interactions, write_catalog, write_interactions
from .preprocess import CorpusStats, DomainCounts, kcore_filter, retain_cross_domain, stats
from .split import partition, read_split, split_lpu, write_split
from .world import WorldConfig, item_domains, make_world

__all__ = [
    "CorpusStats",
    "DomainCounts",
    "IngestResult",
    "RawReview",
    "WorldConfig",
    "ingest",
    "item_domains",
    "kcore_filter",
    "make_world",
    "partition",
    "read_catalog",
    "read_interactions",
    "read_split",
    "retain_cross_domain",
    "split_lpu",
    "stats",
    "write_catalog",
    "write_interactions",
    "write_split",
]
