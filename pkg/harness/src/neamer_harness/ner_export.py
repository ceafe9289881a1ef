"""Run a token-classification checkpoint and export character-level spans.

Output is the workbench's span JSONL: one {"id", "spans": [{start,end,tag}]}
object per sample, offsets into the target sentence. Subword predictions are
grouped with the usual B-/I- convention; tokens whose offsets cannot be
aligned drop the sample's spans with a warning rather than failing the run.
"""

from __future__ import annotations

import warnings
from pathlib import Path

import torch

from .data import Row, read_corpus_csv, write_jsonl


class CheckpointUnavailable(Exception):
    pass


class OffsetAlignmentFailure(Warning):
    pass


def load_ner(checkpoint: str):
    from transformers import AutoModelForTokenClassification, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(checkpoint)
        model = AutoModelForTokenClassification.from_pretrained(checkpoint)
    except Exception as exc:
        raise CheckpointUnavailable(f"cannot load {checkpoint!r}: {exc}") from exc
    if not getattr(tokenizer, "is_fast", False):
        raise CheckpointUnavailable(
            f"{checkpoint!r}: a fast tokenizer is required for character offsets"
        )
    model.eval()
    return tokenizer, model


def _group_spans(labels: list[str], offsets: list[tuple[int, int]]) -> list[dict]:
    """Merge B-/I- tagged subwords into character spans."""
    spans: list[dict] = []
    current: dict | None = None
    for label, (start, end) in zip(labels, offsets):
        if start == end:  # special token
            continue
        if not label or label == "O":
            current = None
            continue
        tag = label.split("-", 1)[-1]
        continues = (
            not label.startswith("B-") and current is not None and current["tag"] == tag
        )
        if continues:
            current["end"] = end
        else:
            current = {"start": start, "end": end, "tag": tag}
            spans.append(current)
    return spans


@torch.no_grad()
def predict_spans(tokenizer, model, target: str, max_length: int = 256) -> list[dict]:
    enc = tokenizer(
        target,
        return_offsets_mapping=True,
        truncation=True,
        max_length=max_length,
        return_tensors="pt",
    )
    offsets = enc.pop("offset_mapping")[0].tolist()
    if len(offsets) == 0:
        raise ValueError("tokenizer produced no tokens")
    logits = model(**enc).logits[0]
    ids = logits.argmax(dim=-1).tolist()
    id2label = model.config.id2label
    labels = [id2label.get(i, "O") for i in ids]
    return _group_spans(labels, [tuple(o) for o in offsets])


def export_ner_spans(
    checkpoint: str,
    corpus_csv: str | Path,
    out_path: str | Path,
    labeled: bool = True,
    max_length: int = 256,
) -> int:
    """Infer NER spans for every sample; returns the number of lines written.

    The output file appears atomically: a malformed corpus or a failed run
    leaves nothing behind.
    """
    rows = read_corpus_csv(corpus_csv, labeled=labeled)
    tokenizer, model = load_ner(checkpoint)

    lines = []
    for row in rows:
        try:
            spans = predict_spans(tokenizer, model, row.target, max_length)
        except Exception as exc:
            warnings.warn(
                f"sample {row.id!r}: offset alignment failed ({exc}); emitting empty spans",
                OffsetAlignmentFailure,
                stacklevel=2,
            )
            spans = []
        lines.append({"id": row.id, "spans": spans})
    write_jsonl(lines, out_path)
    return len(lines)
