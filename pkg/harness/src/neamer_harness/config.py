"""Harness configuration mirroring the workbench's training schedule."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml


class HarnessConfigError(Exception):
    pass


@dataclass(frozen=True)
class HarnessConfig:
    checkpoint: str  # HF identifier or local path, e.g. an NER-finetuned XLM-R
    language_target: str = "EN"
    epochs: int = 24  # 36 for the longer cross-lingual variant
    learning_rate: float = 2e-5
    batch_size: int = 16
    seeds: tuple[int, ...] = (0, 1, 3, 5, 42)
    retry_seeds: tuple[int, ...] = (49, 81, 100, 121)
    failure_threshold: float = 0.5
    max_length: int = 128
    feat_hidden: int = 200
    feat_out: int = 200
    extra_tags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.epochs < 0 or self.batch_size <= 0 or self.learning_rate <= 0:
            raise HarnessConfigError("bad numeric settings")
        if not 0 < self.failure_threshold < 1:
            raise HarnessConfigError("failure_threshold must lie in (0, 1)")
        if set(self.seeds) & set(self.retry_seeds):
            raise HarnessConfigError("seed lists must be disjoint")

    @property
    def tags(self) -> tuple[str, ...]:
        tags = list(self.extra_tags)
        if self.epochs != 24:
            tags.append(f"epochs={self.epochs}")
        return tuple(tags)


def load_harness_config(path: str | Path) -> HarnessConfig:
    tree = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if "checkpoint" not in tree:
        raise HarnessConfigError("config must name a checkpoint")
    kwargs = {}
    for key in ("checkpoint", "language_target", "epochs", "learning_rate", "batch_size",
                "failure_threshold", "max_length", "feat_hidden", "feat_out"):
        if key in tree:
            kwargs[key] = tree[key]
    for key in ("seeds", "retry_seeds", "extra_tags"):
        if key in tree:
            kwargs[key] = tuple(tree[key])
    return HarnessConfig(**kwargs)
