"""Report files: one CSV per experiment plus a seed-averaged summary.

Every CSV row starts with the config hash and the seed; floats are written
with six decimals and nothing time-dependent is recorded, so identical runs
produce identical bytes.
"""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

from .config import ExperimentConfig
from .e1 import e1_alignment
from .e2 import ARMS as E2_ARMS
from .e2 import e2_proxy
from .e3 import ARMS as E3_ARMS
from .e3 import e3_bias
from .scenarios import builtin_scenarios, parse_scenario, run_scenario

E1_COLUMNS = ("config_hash", "seed", "variant", "scope", "f1")
E2_COLUMNS = (
    "config_hash", "seed", "model", "arm", "scope", "ndcg10", "recall10",
    "delta_ndcg10", "delta_recall10", "users", "proxy_rows", "base_hash",
)
E3_COLUMNS = ("config_hash", "seed", "arm", "ndcg10", "recall10", "users", "augmented", "test_size")


def _cell(value) -> str:
    return f"{value:.6f}" if isinstance(value, float) else str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def read_csv(path: Path) -> list[dict[str, str]]:
    with path.open(encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def run_e1(config: ExperimentConfig, out: Path) -> list[tuple]:
    h = config.digest()
    rows = []
    for seed in config.run.seeds:
        report = e1_alignment(config, seed)
        rows += [(h, seed, v, s, f) for v, s, f in report.rows()]
    write_csv(out / "e1.csv", E1_COLUMNS, rows)
    return rows


def run_e2(config: ExperimentConfig, out: Path) -> list[tuple]:
    h = config.digest()
    rows = []
    for seed in config.run.seeds:
        res = e2_proxy(config, seed)
        scopes = sorted({s for (_, _, s) in res.reports}, key=lambda s: (s == "all", s))
        for model in config.e2.models:
            for scope in scopes:
                base = res.reports[(model, "none", scope)]
                for arm in E2_ARMS:
                    r = res.reports[(model, arm, scope)]
                    rows.append(
                        (h, seed, model, arm, scope, r.ndcg, r.recall, r.ndcg - base.ndcg,
                         r.recall - base.recall, r.n_users, res.proxy_counts[arm], res.base_hash[:12])
                    )
    write_csv(out / "e2.csv", E2_COLUMNS, rows)
    return rows


def run_e3(config: ExperimentConfig, out: Path) -> list[tuple]:
    h = config.digest()
    rows = []
    for seed in config.run.seeds:
        res = e3_bias(config, seed)
        for arm in E3_ARMS:
            r = res.reports[arm]
            rows.append((h, seed, arm, r.ndcg, r.recall, r.n_users, res.augmented, res.test_size))
    write_csv(out / "e3.csv", E3_COLUMNS, rows)
    return rows


def run_control(paths: Sequence[str | Path], out: Path) -> dict[str, bool]:
    texts = {str(p): Path(p).read_text(encoding="utf-8") for p in paths} if paths else builtin_scenarios()
    outcome = {}
    for source, text in texts.items():
        sc = parse_scenario(text, source)
        run = run_scenario(sc)
        (out / f"control-{sc.name}.log").write_text(run.log_text(), encoding="utf-8")
        outcome[sc.name] = run.sound if sc.kind == "privacy" else bool(run.decisions)
    return outcome


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def summarize(out: Path) -> str:
    """Seed-averaged tables from whichever CSVs exist in ``out``."""
    lines: list[str] = []
    if (out / "e1.csv").exists():
        rows = read_csv(out / "e1.csv")
        cells: dict[tuple[str, str], list[float]] = defaultdict(list)
        for r in rows:
            cells[(r["variant"], r["scope"])].append(float(r["f1"]))
        variants = list(dict.fromkeys(r["variant"] for r in rows))
        scopes = list(dict.fromkeys(r["scope"] for r in rows))
        n_seeds = len({r["seed"] for r in rows})
        lines.append(f"Alignment F1 (config {rows[0]['config_hash']}, seeds: {n_seeds})")
        lines.append("scope".ljust(20) + "".join(v.rjust(10) for v in variants))
        for s in scopes:
            lines.append(s.ljust(20) + "".join(f"{_mean(cells[(v, s)]):10.4f}" for v in variants))
        lines.append("")
    if (out / "e2.csv").exists():
        rows = read_csv(out / "e2.csv")
        cells = defaultdict(list)
        for r in rows:
            cells[(r["model"], r["scope"], r["arm"])].append(float(r["ndcg10"]))
        lines.append(f"Proxy feedback NDCG@10 (config {rows[0]['config_hash']})")
        lines.append("model".ljust(8) + "scope".ljust(8) + "".join(a.rjust(11) for a in E2_ARMS) + "  delta(assistant)")
        for model in dict.fromkeys(r["model"] for r in rows):
            for scope in dict.fromkeys(r["scope"] for r in rows):
                means = [_mean(cells[(model, scope, a)]) for a in E2_ARMS]
                lines.append(
                    model.ljust(8) + scope.ljust(8) + "".join(f"{m:11.4f}" for m in means) + f"  {means[2] - means[0]:+.4f}"
                )
        lines.append("")
    if (out / "e3.csv").exists():
        rows = read_csv(out / "e3.csv")
        cells = defaultdict(list)
        for r in rows:
            cells[r["arm"]].append((float(r["ndcg10"]), float(r["recall10"])))
        lines.append(f"Bias mitigation on the inverse-frequency test sample (config {rows[0]['config_hash']})")
        for arm in E3_ARMS:
            if cells[arm]:
                n = _mean([v[0] for v in cells[arm]])
                rc = _mean([v[1] for v in cells[arm]])
                lines.append(f"{arm:<12} NDCG@10 {n:.4f}  Recall@10 {rc:.4f}")
        lines.append("")
    text = "\n".join(lines)
    (out / "summary.txt").write_text(text, encoding="utf-8")
    return text
