"""Run configuration: one YAML tree wiring the pipeline together.

Precedence everywhere is: command-line flag > config file > built-in
default. The NEAMER_CONFIG environment variable supplies the config path
when --config is not given.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from .corpus import DEFAULT_MAPPING, Language
from .locality import DEFAULT_LEXICON, LocalityLexicon
from .model import ModelConfig

ENV_CONFIG = "NEAMER_CONFIG"


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    datasets: dict[str, str] = field(default_factory=dict)  # split name -> csv path
    column_mapping: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_MAPPING))
    ner_spans: dict[str, str] = field(default_factory=dict)  # split name -> jsonl path
    lexicon: LocalityLexicon = field(default_factory=lambda: DEFAULT_LEXICON)
    model: ModelConfig = field(default_factory=ModelConfig)
    checkpoint_metas: Optional[str] = None
    output_dir: str = "out"
    raw: dict[str, Any] = field(default_factory=dict)


def _parse_lexicon(tree: Mapping[str, Any]) -> LocalityLexicon:
    def per_language(key: str, default: Mapping[Language, tuple[str, ...]]):
        sub = tree.get(key)
        if not sub:
            return default
        out = dict(default)
        for code, words in sub.items():
            lang = Language(code.strip().upper())
            if not words:
                raise ConfigError(f"lexicon.{key}.{code}: word list is empty")
            out[lang] = tuple(str(w).lower() for w in words)
        return out

    return LocalityLexicon(
        be_verbs=per_language("be_verbs", DEFAULT_LEXICON.be_verbs),
        articles=per_language("articles", DEFAULT_LEXICON.articles),
        determiners=per_language("determiners", DEFAULT_LEXICON.determiners),
    )


def _parse_model(tree: Mapping[str, Any]) -> ModelConfig:
    kwargs: dict[str, Any] = {}
    for key in (
        "text_dim", "feat_hidden", "feat_out", "learning_rate", "lr_multiplier",
        "batch_size", "epochs", "failure_threshold", "hash_buckets", "use_context",
    ):
        if key in tree:
            kwargs[key] = tree[key]
    for key in ("seeds", "retry_seeds", "ngram_sizes"):
        if key in tree:
            kwargs[key] = tuple(int(s) for s in tree[key])
    return ModelConfig(**kwargs)


def load_config(path: str | Path | None) -> RunConfig:
    """Load the YAML config; referenced files must exist at load time."""
    if path is None:
        env = os.environ.get(ENV_CONFIG)
        if env is None:
            return RunConfig()
        path = env
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    tree = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    if not isinstance(tree, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")

    cfg = RunConfig(raw=tree)
    cfg.datasets = {str(k): str(v) for k, v in (tree.get("datasets") or {}).items()}
    if "column_mapping" in tree:
        cfg.column_mapping = {str(k): str(v) for k, v in tree["column_mapping"].items()}
    cfg.ner_spans = {str(k): str(v) for k, v in (tree.get("ner_spans") or {}).items()}
    cfg.lexicon = _parse_lexicon(tree.get("lexicon") or {})
    cfg.model = _parse_model(tree.get("model") or {})
    cfg.checkpoint_metas = tree.get("checkpoint_metas")
    cfg.output_dir = str(tree.get("output_dir", "out"))

    base = path.parent
    for name, file_path in {**cfg.datasets, **cfg.ner_spans}.items():
        resolved = (base / file_path) if not Path(file_path).is_absolute() else Path(file_path)
        if not resolved.exists():
            raise ConfigError(f"{name}: referenced file {file_path} does not exist")
    if cfg.checkpoint_metas:
        resolved = base / cfg.checkpoint_metas
        if not Path(cfg.checkpoint_metas).is_absolute() and not resolved.exists():
            raise ConfigError(f"checkpoint_metas: {cfg.checkpoint_metas} does not exist")
    return cfg
