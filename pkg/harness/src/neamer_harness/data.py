"""File-format plumbing shared by the harness commands.

These mirror the workbench's external formats exactly (corpus CSV with the
organizers' column names; span/feature/score JSONL) without importing the
workbench package.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Optional


class MalformedCorpus(Exception):
    pass


@dataclass(frozen=True)
class Row:
    id: str
    language: str
    mwe: str
    target: str
    label: Optional[int]


def read_corpus_csv(path: str | Path, labeled: bool = True) -> list[Row]:
    rows: list[Row] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"ID", "Language", "MWE", "Target"}
        if not required <= set(reader.fieldnames or []):
            raise MalformedCorpus(f"{path}: missing columns {required - set(reader.fieldnames or [])}")
        for i, row in enumerate(reader):
            label_raw = (row.get("Label") or "").strip()
            label: Optional[int] = None
            if label_raw:
                if label_raw not in ("0", "1"):
                    raise MalformedCorpus(f"{path} row {i}: bad label {label_raw!r}")
                label = int(label_raw)
            if labeled and label is None:
                raise MalformedCorpus(f"{path} row {i}: missing label")
            if not row.get("Target") or not row.get("MWE"):
                raise MalformedCorpus(f"{path} row {i}: empty MWE or Target")
            rows.append(
                Row(
                    id=row["ID"],
                    language=row["Language"].strip().upper(),
                    mwe=row["MWE"],
                    target=row["Target"],
                    label=label,
                )
            )
    return rows


def read_feature_jsonl(path: str | Path) -> dict[str, list[int]]:
    out: dict[str, list[int]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            out[obj["id"]] = [int(v) for v in obj["features"]]
    return out


@contextmanager
def atomic_write(path: str | Path):
    """Write to a temp file and rename on success; no partial outputs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    fh = os.fdopen(fd, "w", encoding="utf-8")
    try:
        yield fh
        fh.close()
        os.replace(tmp, path)
    except BaseException:
        fh.close()
        os.unlink(tmp)
        raise


def write_jsonl(objs, path: str | Path) -> None:
    with atomic_write(path) as fh:
        for obj in objs:
            fh.write(json.dumps(obj) + "\n")
