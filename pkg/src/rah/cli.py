"""Command-line entry point: ``rah <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .alignment import LoopConfig, proxy_actions, store_load, store_save
from .core import Action, SplitName
from .data import (
    ingest,
    item_domains,
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
from .experiments import load_config, run_control, run_e1, run_e2, run_e3, summarize
from .experiments.common import by_user, learn_users, make_backend
from .experiments.report import write_csv
from .llm.oracle import SyntheticWorld


def _world_or_catalog(path: str | None, catalog_path: str | None) -> SyntheticWorld:
    if path:
        return SyntheticWorld.loads(Path(path).read_text(encoding="utf-8"))
    if not catalog_path:
        raise SystemExit("need --world or --catalog")
    # A catalog-only world lets the oracle perceive items but answers no user queries.
    return SyntheticWorld(read_catalog(catalog_path), {})


def cmd_synth(args, config, out: Path) -> int:
    seed = args.seed if args.seed is not None else 0
    world, panel, background = make_world(replace(config.world, seed=seed))
    (out / "world.json").write_text(world.dumps(), encoding="utf-8")
    write_catalog(world.catalog, out / "catalog.jsonl")
    write_interactions(panel, out / "interactions.jsonl")
    write_interactions(background, out / "background.jsonl")
    print(f"world {world.digest()}: {len(world.catalog)} items, {len(panel)} panel and {len(background)} background interactions")
    return 0


def cmd_ingest(args, config, out: Path) -> int:
    titles = None
    if args.titles:
        with open(args.titles, encoding="utf-8") as fh:
            titles = {d["item"]: d for d in map(json.loads, filter(str.strip, fh))}
    result = ingest(args.files, titles)
    rows = result.interactions
    domains = result.item_domain
    if args.cross_domain:
        rows = retain_cross_domain(rows, domains)
    if args.kcore:
        rows = kcore_filter(rows, args.kcore)
    kept = {x.item for x in rows}
    write_interactions(rows, out / "interactions.jsonl")
    write_catalog({k: v for k, v in result.catalog.items() if k in kept}, out / "catalog.jsonl")
    table = stats(rows, domains)
    write_csv(out / "stats.csv", ("domain", "users", "items", "interactions"), table.rows())
    print(f"{len(rows)} interactions kept; {result.skipped} malformed, {result.neutral} neutral, {result.duplicates} duplicate records dropped")
    return 0


def cmd_split(args, config, out: Path) -> int:
    rows = read_interactions(args.interactions)
    seed = args.seed if args.seed is not None else 0
    split = split_lpu(rows, seed)
    write_split(split, out / "split.tsv")
    sizes = {name.value: len(v) for name, v in partition(rows, split).items()}
    print(" ".join(f"{k}={v}" for k, v in sorted(sizes.items())))
    return 0


def cmd_learn(args, config, out: Path) -> int:
    world = _world_or_catalog(args.world, args.catalog)
    rows = read_interactions(args.interactions)
    if args.split:
        rows = partition(rows, read_split(args.split))[SplitName.LEARN]
    groups = by_user(rows)
    users = args.user or sorted(groups)
    loop = LoopConfig.from_variant(args.variant, max_iters=args.max_iters, answer_queries=bool(world.users))
    backend = make_backend(config, world)
    people = learn_users(groups, users, world.catalog, loop, backend, world if world.users else None)
    for user, personality in people.items():
        store_save(personality, out / "personalities" / f"{user}.jsonl")
    print(f"learned {len(people)} personalities with {args.variant}")
    return 0


def cmd_proxy(args, config, out: Path) -> int:
    world = _world_or_catalog(args.world, args.catalog)
    backend = make_backend(config, world)
    rows = read_interactions(args.interactions)
    if args.split:
        rows = partition(rows, read_split(args.split))[SplitName.PROXY]
    emitted = []
    for user, user_rows in sorted(by_user(rows).items()):
        path = Path(args.personalities) / f"{user}.jsonl"
        if not path.exists():
            continue
        items = [world.item(x.item) for x in sorted(user_rows, key=lambda x: x.item)]
        emitted += proxy_actions(store_load(path), items, backend)
    write_interactions(emitted, out / "proxy.jsonl")
    likes = sum(x.action is Action.LIKE for x in emitted)
    print(f"{len(emitted)} proxy actions ({likes} Like)")
    return 0


def _experiment(runner):
    def run(args, config, out: Path) -> int:
        runner(config, out)
        print(summarize(out))
        return 0

    return run


def cmd_control(args, config, out: Path) -> int:
    outcome = run_control(args.scenarios, out)
    for name, ok in outcome.items():
        print(f"{name}: {'ok' if ok else 'UNSOUND'}")
    return 0 if all(outcome.values()) else 1


def cmd_report(args, config, out: Path) -> int:
    print(summarize(out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rah", description="Recommender/assistant/human simulator.")
    parser.add_argument("--config", help="experiment config file (defaults apply when omitted)")
    parser.add_argument("--seed", type=int, help="run a single seed instead of the configured list")
    parser.add_argument("--backend", choices=("oracle", "remote"), help="override the configured backend")
    parser.add_argument("--out", default="runs", help="output directory (default: runs)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic world and its interactions")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="read review files into interactions")
    p.add_argument("files", nargs="+", help="review files, optionally as domain=path")
    p.add_argument("--titles", help="item metadata JSONL with item, title, description, tags")
    p.add_argument("--kcore", type=int, default=0, help="apply a k-core filter")
    p.add_argument("--cross-domain", action="store_true", help="keep only users active in several domains")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="assign Learn/Proxy/Unseen sets")
    p.add_argument("--interactions", required=True)
    p.set_defaults(func=cmd_split)

    for name, func, what in (("learn", cmd_learn, "learn personalities"), ("proxy", cmd_proxy, "emit proxy actions")):
        p = sub.add_parser(name, help=what)
        p.add_argument("--interactions", required=True)
        p.add_argument("--split", help="restrict to the matching set of this split file")
        p.add_argument("--world", help="world.json from synth")
        p.add_argument("--catalog", help="catalog JSONL when no world file exists")
        p.set_defaults(func=func)
        if name == "learn":
            p.add_argument("--variant", default="L+C+R", choices=("L", "L+R", "L+C", "L+C+R"))
            p.add_argument("--max-iters", type=int, default=3)
            p.add_argument("--user", action="append", help="learn only these users")
        else:
            p.add_argument("--personalities", required=True, help="directory written by learn")

    for name, runner in (("e1", run_e1), ("e2", run_e2), ("e3", run_e3)):
        p = sub.add_parser(name, help=f"run experiment {name}")
        p.set_defaults(func=_experiment(runner))

    p = sub.add_parser("control", help="replay control and privacy scenarios")
    p.add_argument("scenarios", nargs="*", help="scenario files (built-in case studies when omitted)")
    p.set_defaults(func=cmd_control)

    p = sub.add_parser("report", help="rebuild summary.txt from the CSVs in --out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"rah: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config = config.with_seeds([args.seed])
    if args.backend:
        config = config.with_backend(args.backend)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return args.func(args, config, out)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"rah: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
