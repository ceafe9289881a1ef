"""Checkpoint ensembling over score files.

The model boundary is file-based: each checkpoint emits one ScoreRecord per
sample (its probability of the non-idiomatic class). Selection picks the
top-k checkpoints by validation F1 per language; Galician routes to the
Portuguese-target checkpoints. Combination is mean-of-scores by default,
with majority vote retained for comparison.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .corpus import Corpus, Label, Language, Split
from .locality import LocalityVector


class Strategy(enum.Enum):
    MEAN_SCORE = "mean_score"
    MAJORITY_VOTE = "majority_vote"


class NotEnoughCheckpoints(Exception):
    pass


class EmptyGroup(Exception):
    pass


class IdMismatch(Exception):
    pass


@dataclass(frozen=True)
class ScoreRecord:
    sample_id: str
    model_id: str
    p_nonidiomatic: float
    language: Language
    split: Split

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_nonidiomatic <= 1.0:
            raise ValueError(
                f"{self.sample_id}/{self.model_id}: probability {self.p_nonidiomatic} outside [0, 1]"
            )


@dataclass(frozen=True)
class CheckpointMeta:
    model_id: str
    language_target: Language
    validation_f1: float
    tags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not 0.0 <= self.validation_f1 <= 1.0:
            raise ValueError(f"{self.model_id}: validation F1 {self.validation_f1} outside [0, 1]")


def select_topk(metas: Sequence[CheckpointMeta], k: int, language: Language) -> list[str]:
    """Top-k model ids by validation F1 for a language, ties lexicographic.

    Galician has no dedicated checkpoints: it is served by the
    Portuguese-target models.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    routed = Language.PT if language is Language.GL else language
    candidates = [m for m in metas if m.language_target is routed]
    if len(candidates) < k:
        raise NotEnoughCheckpoints(
            f"need {k} checkpoints for {language.value}, have {len(candidates)}"
        )
    candidates.sort(key=lambda m: (-m.validation_f1, m.model_id))
    return [m.model_id for m in candidates[:k]]


@dataclass(frozen=True)
class CombinedPrediction:
    sample_id: str
    label: Label
    score: float  # mean p_nonidiomatic across the combined records


def combine(
    records_by_sample: Mapping[str, Sequence[ScoreRecord]],
    strategy: Strategy = Strategy.MEAN_SCORE,
) -> dict[str, CombinedPrediction]:
    """Combine per-checkpoint scores into one prediction per sample.

    mean_score: non-idiomatic iff the mean probability >= 0.5.
    majority_vote: threshold each record at 0.5, then majority; exact vote
    ties fall back to the mean rule.
    """
    out: dict[str, CombinedPrediction] = {}
    for sample_id, records in records_by_sample.items():
        if not records:
            raise EmptyGroup(f"sample {sample_id!r} has no score records")
        # fsum is exactly rounded, keeping the mean order-independent
        mean = math.fsum(r.p_nonidiomatic for r in records) / len(records)
        if strategy is Strategy.MEAN_SCORE:
            label = Label.NON_IDIOMATIC if mean >= 0.5 else Label.IDIOMATIC
        else:
            votes = sum(1 if r.p_nonidiomatic >= 0.5 else 0 for r in records)
            if 2 * votes > len(records):
                label = Label.NON_IDIOMATIC
            elif 2 * votes < len(records):
                label = Label.IDIOMATIC
            else:
                label = Label.NON_IDIOMATIC if mean >= 0.5 else Label.IDIOMATIC
        out[sample_id] = CombinedPrediction(sample_id=sample_id, label=label, score=mean)
    return out


def group_records(
    records: Iterable[ScoreRecord], model_ids: Optional[Sequence[str]] = None
) -> dict[str, list[ScoreRecord]]:
    """Group by sample, optionally restricted to the selected checkpoints."""
    keep = set(model_ids) if model_ids is not None else None
    grouped: dict[str, list[ScoreRecord]] = {}
    seen: set[tuple[str, str]] = set()
    for record in records:
        if keep is not None and record.model_id not in keep:
            continue
        key = (record.sample_id, record.model_id)
        if key in seen:
            raise ValueError(f"duplicate score for {key}")
        seen.add(key)
        grouped.setdefault(record.sample_id, []).append(record)
    return grouped


@dataclass(frozen=True)
class DiffItem:
    sample_id: str
    gold: Label
    a_label: Label
    b_label: Label
    vector: Optional[LocalityVector] = None


@dataclass(frozen=True)
class DiffReport:
    improvements: tuple[DiffItem, ...]  # a wrong, b right
    regressions: tuple[DiffItem, ...]  # a right, b wrong


def diff_predictions(
    a: Mapping[str, CombinedPrediction],
    b: Mapping[str, CombinedPrediction],
    gold: Corpus,
    vectors: Mapping[str, LocalityVector] | None = None,
) -> DiffReport:
    """Samples one prediction set fixes or breaks relative to another."""
    gold_labels = gold.labels()
    for name, preds in (("a", a), ("b", b)):
        if set(preds) != set(gold_labels):
            raise IdMismatch(f"prediction set {name} does not cover the gold ids")
    improvements, regressions = [], []
    for sample_id, gold_label in gold_labels.items():
        a_label, b_label = a[sample_id].label, b[sample_id].label
        item = DiffItem(
            sample_id=sample_id,
            gold=gold_label,
            a_label=a_label,
            b_label=b_label,
            vector=vectors.get(sample_id) if vectors else None,
        )
        if a_label != gold_label and b_label == gold_label:
            improvements.append(item)
        elif a_label == gold_label and b_label != gold_label:
            regressions.append(item)
    return DiffReport(improvements=tuple(improvements), regressions=tuple(regressions))


# ---------------------------------------------------------------------------
# Wire formats


def write_scores(records: Iterable[ScoreRecord], path: str | Path) -> None:
    """JSON-lines, one ScoreRecord per line, exact field names."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(
                json.dumps(
                    {
                        "sample_id": r.sample_id,
                        "model_id": r.model_id,
                        "p_nonidiomatic": r.p_nonidiomatic,
                        "language": r.language.value,
                        "split": r.split.value,
                    }
                )
                + "\n"
            )


def read_scores(path: str | Path) -> list[ScoreRecord]:
    records: list[ScoreRecord] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            records.append(
                ScoreRecord(
                    sample_id=obj["sample_id"],
                    model_id=obj["model_id"],
                    p_nonidiomatic=float(obj["p_nonidiomatic"]),
                    language=Language(obj["language"]),
                    split=Split(obj["split"]),
                )
            )
    return records


def write_metas(metas: Iterable[CheckpointMeta], path: str | Path) -> None:
    payload = [
        {
            "model_id": m.model_id,
            "language_target": m.language_target.value,
            "validation_f1": m.validation_f1,
            "tags": list(m.tags),
        }
        for m in metas
    ]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def read_metas(path: str | Path) -> list[CheckpointMeta]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        CheckpointMeta(
            model_id=m["model_id"],
            language_target=Language(m["language_target"]),
            validation_f1=float(m["validation_f1"]),
            tags=tuple(m.get("tags", ())),
        )
        for m in payload
    ]


def write_predictions(preds: Mapping[str, CombinedPrediction], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sample_id in preds:
            p = preds[sample_id]
            fh.write(
                json.dumps({"sample_id": p.sample_id, "label": int(p.label), "score": p.score})
                + "\n"
            )


def read_predictions(path: str | Path) -> dict[str, CombinedPrediction]:
    out: dict[str, CombinedPrediction] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            out[obj["sample_id"]] = CombinedPrediction(
                sample_id=obj["sample_id"], label=Label(obj["label"]), score=float(obj["score"])
            )
    return out
