"""Experiment configuration: an INI file with a fixed, validated schema.

Sections and keys (all optional; defaults shown by ``default_config_text``):

[run]    backend, seeds, cache_dir
[world]  every WorldConfig field except ``seed``
[e1]     variants, max_iters, answer_queries
[e2]     models, variant, k
[e3]     zipf, gamma, clip, threshold, test_fraction, variant, k
[mf]     FactorConfig fields for MF
[fm]     FactorConfig fields for FM
[knn]    k
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from ..alignment.loop import VARIANTS
from ..data.world import WorldConfig
from ..llm.messages import stable_digest
from ..recsys.models import KINDS, FactorConfig, KNNConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunSection:
    backend: str = "oracle"
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    cache_dir: str = ""


@dataclass(frozen=True)
class E1Section:
    variants: tuple[str, ...] = VARIANTS
    max_iters: int = 3
    answer_queries: bool = True


@dataclass(frozen=True)
class E2Section:
    models: tuple[str, ...] = KINDS
    variant: str = "L+C+R"
    k: int = 10


@dataclass(frozen=True)
class E3Section:
    zipf: float = 1.0
    gamma: float = 1.0
    clip: float = 0.01
    threshold: int = 10
    test_fraction: float = 0.2
    variant: str = "L+C+R"
    k: int = 10


@dataclass(frozen=True)
class ExperimentConfig:
    run: RunSection = field(default_factory=RunSection)
    world: WorldConfig = field(default_factory=lambda: WorldConfig(noise_rate=0.05, n_background=100))
    e1: E1Section = field(default_factory=E1Section)
    e2: E2Section = field(default_factory=E2Section)
    e3: E3Section = field(default_factory=E3Section)
    mf: FactorConfig = field(default_factory=FactorConfig)
    fm: FactorConfig = field(default_factory=FactorConfig)
    knn: KNNConfig = field(default_factory=KNNConfig)

    def __post_init__(self):
        if self.run.backend not in ("oracle", "remote"):
            raise ConfigError(f"backend must be oracle or remote, not {self.run.backend!r}")
        if not self.run.seeds:
            raise ConfigError("at least one seed is required")
        for v in self.e1.variants:
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}")
        for v in (self.e2.variant, self.e3.variant):
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}")
        for m in self.e2.models:
            if m not in KINDS:
                raise ConfigError(f"unknown model {m!r}")
        if not 0 < self.e3.test_fraction < 1:
            raise ConfigError("e3.test_fraction must lie in (0, 1)")
        if self.e3.threshold < 0 or self.e2.k < 1 or self.e3.k < 1:
            raise ConfigError("threshold must be non-negative and k positive")

    def to_dict(self) -> dict[str, Any]:
        return {f.name: asdict(getattr(self, f.name)) for f in fields(self)}

    def digest(self) -> str:
        """Hash of everything except the seed list, so per-seed rows share it."""
        data = self.to_dict()
        data["run"] = {k: v for k, v in data["run"].items() if k != "seeds"}
        return stable_digest(data)[:12]

    def with_seeds(self, seeds) -> ExperimentConfig:
        return replace(self, run=replace(self.run, seeds=tuple(seeds)))

    def with_backend(self, backend: str) -> ExperimentConfig:
        return replace(self, run=replace(self.run, backend=backend))


SECTIONS = {
    "run": RunSection,
    "world": WorldConfig,
    "e1": E1Section,
    "e2": E2Section,
    "e3": E3Section,
    "mf": FactorConfig,
    "fm": FactorConfig,
    "knn": KNNConfig,
}


def _coerce(raw: str, default: Any, where: str) -> Any:
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            lowered = raw.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, tuple):
            items = [p.strip() for p in raw.split(",") if p.strip()]
            if default and isinstance(default[0], int):
                return tuple(int(p) for p in items)
            return tuple(items)
        if default is None or isinstance(default, int) and not isinstance(default, bool):
            if raw.lower() in ("none", "full"):
                return None
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r}") from None


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    base = ExperimentConfig()
    sections: dict[str, Any] = {}
    for name in parser.sections():
        if name not in SECTIONS:
            raise ConfigError(f"{source}: unknown section [{name}]")
        current = getattr(base, name)
        allowed = {f.name for f in fields(current)} - ({"seed"} if name == "world" else set())
        updates = {}
        for key, raw in parser.items(name):
            if key not in allowed:
                raise ConfigError(f"{source}: unknown key {key!r} in [{name}]")
            updates[key] = _coerce(raw, getattr(current, key), f"{source} [{name}] {key}")
        try:
            sections[name] = replace(current, **updates)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source} [{name}]: {exc}") from exc
    try:
        return replace(base, **sections)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    return parse_config(Path(path).read_text(encoding="utf-8"), str(path))


def default_config_text() -> str:
    base = ExperimentConfig()
    lines = []
    for name in SECTIONS:
        lines.append(f"[{name}]")
        for f in fields(getattr(base, name)):
            if name == "world" and f.name == "seed":
                continue
            value = getattr(getattr(base, name), f.name)
            if isinstance(value, tuple):
                value = ", ".join(str(v) for v in value)
            elif isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{f.name} = {value}")
        lines.append("")
    return "\n".join(lines)
