"""Fine-tune a pretrained checkpoint on the idiom task with feature fusion.

The locality vector goes through a two-layer fully connected encoder
(widths 200/200) and is concatenated to the transformer's [CLS]
representation before a linear classification head. Training follows the
published schedule: lr 2e-5, batch 16, 24 epochs (36 for the long variant),
seeds 0/1/3/5/42 with retries 49/81/100/121 on best-validation-F1 < 0.5.

All evaluation beyond checkpoint selection happens downstream in the
workbench core; this module only emits score and metadata files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import torch
from torch import nn
from torch.utils.data import DataLoader, Dataset

from .config import HarnessConfig
from .data import Row, atomic_write, read_corpus_csv, read_feature_jsonl, write_jsonl


class FeatureAugmentedClassifier(nn.Module):
    def __init__(self, checkpoint: str, feat_hidden: int = 200, feat_out: int = 200):
        super().__init__()
        from transformers import AutoModel

        self.encoder = AutoModel.from_pretrained(checkpoint)
        hidden = self.encoder.config.hidden_size
        self.feature_encoder = nn.Sequential(
            nn.Linear(6, feat_hidden),
            nn.ReLU(),
            nn.Linear(feat_hidden, feat_out),
            nn.ReLU(),
        )
        self.head = nn.Linear(hidden + feat_out, 2)

    def forward(self, input_ids, attention_mask, features):
        out = self.encoder(input_ids=input_ids, attention_mask=attention_mask)
        pooled = out.last_hidden_state[:, 0]
        fused = torch.cat([pooled, self.feature_encoder(features)], dim=-1)
        return self.head(fused)


class IdiomDataset(Dataset):
    def __init__(self, rows: Sequence[Row], features: dict[str, list[int]],
                 tokenizer, max_length: int):
        missing = [r.id for r in rows if r.id not in features]
        if missing:
            raise ValueError(f"{len(missing)} samples lack feature vectors, e.g. {missing[0]!r}")
        self.rows = list(rows)
        self.features = features
        self.tokenizer = tokenizer
        self.max_length = max_length

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, i):
        row = self.rows[i]
        enc = self.tokenizer(
            row.target,
            truncation=True,
            max_length=self.max_length,
            padding="max_length",
            return_tensors="pt",
        )
        return {
            "input_ids": enc["input_ids"][0],
            "attention_mask": enc["attention_mask"][0],
            "features": torch.tensor(self.features[row.id], dtype=torch.float32),
            "label": torch.tensor(row.label if row.label is not None else -1),
            "index": i,
        }


def _macro_f1(gold: list[int], pred: list[int]) -> float:
    f1 = []
    for cls in (0, 1):
        tp = sum(1 for g, p in zip(gold, pred) if g == cls and p == cls)
        fp = sum(1 for g, p in zip(gold, pred) if g != cls and p == cls)
        fn = sum(1 for g, p in zip(gold, pred) if g == cls and p != cls)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1.append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)
    return (f1[0] + f1[1]) / 2


@torch.no_grad()
def _predict(model, loader) -> list[float]:
    model.eval()
    scores: list[float] = []
    for batch in loader:
        logits = model(batch["input_ids"], batch["attention_mask"], batch["features"])
        scores.extend(torch.softmax(logits, dim=-1)[:, 1].tolist())
    return scores


@dataclass
class SeedOutcome:
    seed: int
    best_f1: float
    failed: bool
    retry: bool
    valid_scores: list[float]
    test_scores: Optional[list[float]]


def _run_seed(config: HarnessConfig, tokenizer, train_ds, valid_ds, test_ds, seed: int) -> SeedOutcome:
    torch.manual_seed(seed)
    model = FeatureAugmentedClassifier(config.checkpoint, config.feat_hidden, config.feat_out)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss()
    generator = torch.Generator().manual_seed(seed)
    train_loader = DataLoader(train_ds, batch_size=config.batch_size, shuffle=True,
                              generator=generator)
    valid_loader = DataLoader(valid_ds, batch_size=config.batch_size)

    valid_gold = [r.label for r in valid_ds.rows]

    def evaluate() -> tuple[float, list[float]]:
        scores = _predict(model, valid_loader)
        pred = [1 if s >= 0.5 else 0 for s in scores]
        return _macro_f1(valid_gold, pred), scores

    best_f1, best_scores = evaluate()
    best_state = {k: v.clone() for k, v in model.state_dict().items()}
    for _ in range(config.epochs):
        model.train()
        for batch in train_loader:
            optimizer.zero_grad()
            logits = model(batch["input_ids"], batch["attention_mask"], batch["features"])
            loss = loss_fn(logits, batch["label"])
            loss.backward()
            optimizer.step()
        f1, scores = evaluate()
        if f1 > best_f1:
            best_f1, best_scores = f1, scores
            best_state = {k: v.clone() for k, v in model.state_dict().items()}

    test_scores = None
    if test_ds is not None:
        model.load_state_dict(best_state)
        test_scores = _predict(model, DataLoader(test_ds, batch_size=config.batch_size))
    return SeedOutcome(
        seed=seed,
        best_f1=best_f1,
        failed=best_f1 < config.failure_threshold,
        retry=False,
        valid_scores=best_scores,
        test_scores=test_scores,
    )


SeedRunner = Callable[..., SeedOutcome]


def finetune_and_score(
    config: HarnessConfig,
    train_csv: str | Path,
    valid_csv: str | Path,
    out_dir: str | Path,
    test_csv: str | Path | None = None,
    features_jsonl: str | Path | None = None,
    model_tag: str = "xfmr",
    runner: SeedRunner = _run_seed,
) -> list[SeedOutcome]:
    """Run the seed schedule with retries; write score JSONL + metadata.

    Every emitted score file follows the workbench ScoreRecord schema; the
    checkpoint metadata JSON carries validation F1 and tags.
    """
    from transformers import AutoTokenizer

    train_rows = read_corpus_csv(train_csv)
    valid_rows = read_corpus_csv(valid_csv)
    test_rows = read_corpus_csv(test_csv, labeled=False) if test_csv else None
    features = read_feature_jsonl(features_jsonl) if features_jsonl else {
        r.id: [0] * 6 for r in train_rows + valid_rows + (test_rows or [])
    }
    tokenizer = AutoTokenizer.from_pretrained(config.checkpoint)
    train_ds = IdiomDataset(train_rows, features, tokenizer, config.max_length)
    valid_ds = IdiomDataset(valid_rows, features, tokenizer, config.max_length)
    test_ds = IdiomDataset(test_rows, features, tokenizer, config.max_length) if test_rows else None

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    retry_pool = list(config.retry_seeds)
    queue: list[tuple[int, bool]] = [(s, False) for s in config.seeds]
    outcomes: list[SeedOutcome] = []
    metas = []
    k = 0
    while k < len(queue):
        seed, is_retry = queue[k]
        k += 1
        outcome = runner(config, tokenizer, train_ds, valid_ds, test_ds, seed)
        outcome.retry = is_retry
        outcomes.append(outcome)
        if outcome.failed and retry_pool:
            queue.append((retry_pool.pop(0), True))

        model_id = f"{model_tag}-seed{seed}"
        lines = [
            {
                "sample_id": row.id,
                "model_id": model_id,
                "p_nonidiomatic": score,
                "language": row.language,
                "split": "validation",
            }
            for row, score in zip(valid_rows, outcome.valid_scores)
        ]
        if outcome.test_scores is not None and test_rows:
            lines += [
                {
                    "sample_id": row.id,
                    "model_id": model_id,
                    "p_nonidiomatic": score,
                    "language": row.language,
                    "split": "test",
                }
                for row, score in zip(test_rows, outcome.test_scores)
            ]
        write_jsonl(lines, out_dir / f"{model_id}.scores.jsonl")

        tags = list(config.tags)
        if is_retry:
            tags.append("retry")
        if outcome.failed:
            tags.append("training_failure")
        metas.append(
            {
                "model_id": model_id,
                "language_target": config.language_target,
                "validation_f1": outcome.best_f1,
                "tags": tags,
            }
        )

    with atomic_write(out_dir / "checkpoints.json") as fh:
        fh.write(json.dumps(metas, indent=2) + "\n")
    return outcomes
