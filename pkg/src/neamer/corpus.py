"""Dataset ingestion and validation.

Holds the idiomaticity corpora (ZeroShot / OneShot splits, three languages)
behind immutable value types. Label convention: 0 = idiomatic usage,
1 = literal / non-idiomatic usage.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence


class Language(enum.Enum):
    EN = "EN"
    PT = "PT"
    GL = "GL"


class Label(enum.IntEnum):
    IDIOMATIC = 0
    NON_IDIOMATIC = 1


class Split(enum.Enum):
    ZERO_SHOT_TRAIN = "zeroshot_train"
    ONE_SHOT_TRAIN = "oneshot_train"
    VALIDATION = "validation"
    TEST = "test"


#: Column names as released by the task organizers.
DEFAULT_MAPPING: Mapping[str, str] = {
    "id": "ID",
    "language": "Language",
    "mwe": "MWE",
    "previous": "Previous",
    "target": "Target",
    "next": "Next",
    "label": "Label",
}

REQUIRED_FIELDS = ("id", "language", "mwe", "target")
OPTIONAL_FIELDS = ("previous", "next", "label")


class CorpusError(Exception):
    """Base class for ingestion failures."""


class MissingColumn(CorpusError):
    def __init__(self, column: str, header: Sequence[str]):
        self.column = column
        super().__init__(f"mapped column {column!r} not found in header {list(header)}")


class BadLabel(CorpusError):
    def __init__(self, row_index: int, value: str):
        self.row_index = row_index
        self.value = value
        super().__init__(f"row {row_index}: label {value!r} outside {{0, 1}}")


class BadEncoding(CorpusError):
    pass


class BadRow(CorpusError):
    def __init__(self, row_index: int, reason: str):
        self.row_index = row_index
        super().__init__(f"row {row_index}: {reason}")


@dataclass(frozen=True)
class Sample:
    """One corpus row."""

    id: str
    language: Language
    mwe: str
    target: str
    split: Split
    previous: Optional[str] = None
    next: Optional[str] = None
    label: Optional[Label] = None

    def __post_init__(self) -> None:
        if not self.target:
            raise ValueError(f"sample {self.id!r}: empty target")
        if not self.mwe:
            raise ValueError(f"sample {self.id!r}: empty mwe")
        if self.label is None and self.split is not Split.TEST:
            raise ValueError(f"sample {self.id!r}: label required for split {self.split.value}")


@dataclass(frozen=True)
class Corpus:
    """Ordered, validated collection of samples plus its provenance."""

    samples: tuple[Sample, ...]
    source: str = "<memory>"
    mapping: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_MAPPING))

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def by_id(self) -> dict[str, Sample]:
        return {s.id: s for s in self.samples}

    def labels(self) -> dict[str, Label]:
        return {s.id: s.label for s in self.samples if s.label is not None}


def _parse_language(value: str, row_index: int) -> Language:
    try:
        return Language(value.strip().upper())
    except ValueError:
        raise BadRow(row_index, f"unknown language code {value!r}") from None


def _parse_label(value: str, row_index: int) -> Optional[Label]:
    value = value.strip()
    if value == "":
        return None
    if value not in ("0", "1"):
        raise BadLabel(row_index, value)
    return Label(int(value))


def ingest_csv(
    path: str | Path,
    mapping: Mapping[str, str] | None = None,
    split: Split = Split.ZERO_SHOT_TRAIN,
) -> Corpus:
    """Parse a UTF-8 CSV into a validated Corpus.

    Any invalid row raises immediately with its (0-based) data row index;
    nothing is silently dropped.
    """
    path = Path(path)
    mapping = dict(mapping) if mapping is not None else dict(DEFAULT_MAPPING)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise BadEncoding(f"{path}: not valid UTF-8 ({exc})") from exc

    reader = csv.DictReader(text.splitlines())
    header = reader.fieldnames or []
    has_label_column = mapping.get("label") in header

    for req in REQUIRED_FIELDS:
        if mapping[req] not in header:
            raise MissingColumn(mapping[req], header)
    if not has_label_column and split is not Split.TEST:
        raise MissingColumn(mapping.get("label", "Label"), header)

    samples: list[Sample] = []
    seen_ids: set[str] = set()
    for i, row in enumerate(reader):
        sample_id = (row.get(mapping["id"]) or "").strip()
        if not sample_id:
            raise BadRow(i, "empty id")
        if sample_id in seen_ids:
            raise BadRow(i, f"duplicate id {sample_id!r}")
        seen_ids.add(sample_id)

        language = _parse_language(row.get(mapping["language"]) or "", i)
        mwe = (row.get(mapping["mwe"]) or "").strip()
        target = row.get(mapping["target"]) or ""
        if not mwe:
            raise BadRow(i, "empty mwe")
        if not target:
            raise BadRow(i, "empty target")

        label: Optional[Label] = None
        if has_label_column:
            label = _parse_label(row.get(mapping["label"]) or "", i)
        if label is None and split is not Split.TEST:
            raise BadRow(i, "missing label on a labeled split")
        if split is Split.TEST:
            label = None

        def _opt(key: str) -> Optional[str]:
            col = mapping.get(key)
            if col is None or col not in header:
                return None
            value = row.get(col) or ""
            return value if value else None

        samples.append(
            Sample(
                id=sample_id,
                language=language,
                mwe=mwe,
                target=target,
                split=split,
                previous=_opt("previous"),
                next=_opt("next"),
                label=label,
            )
        )

    return Corpus(samples=tuple(samples), source=str(path), mapping=mapping)


def export_csv(corpus: Corpus, path: str | Path) -> None:
    """Write a Corpus back out; re-ingesting yields an equal Corpus."""
    mapping = corpus.mapping
    columns = [mapping[k] for k in ("id", "language", "mwe", "previous", "target", "next", "label")]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for s in corpus.samples:
            writer.writerow(
                [
                    s.id,
                    s.language.value,
                    s.mwe,
                    s.previous or "",
                    s.target,
                    s.next or "",
                    "" if s.label is None else str(int(s.label)),
                ]
            )
