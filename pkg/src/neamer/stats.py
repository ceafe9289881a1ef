"""Per-feature label statistics over a labeled corpus.

Reproduces the label-statistics report: for each locality feature, how many
samples fire it and how the gold labels split, plus an "All" row.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .corpus import Corpus, Label
from .locality import FEATURE_DISPLAY, FEATURE_NAMES, LocalityVector


class MissingVector(Exception):
    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"no feature vector for sample {sample_id!r}")


@dataclass(frozen=True)
class FeatureStats:
    feature: str  # display name, or "All"
    total: int
    idiomatic: int
    non_idiomatic: int

    def __post_init__(self) -> None:
        if self.total != self.idiomatic + self.non_idiomatic:
            raise ValueError(f"{self.feature}: {self.total} != {self.idiomatic} + {self.non_idiomatic}")


def _sort_key(row: FeatureStats) -> tuple[int, str]:
    # total descending, then display name (quotes ignored) for determinism
    return (-row.total, row.feature.strip('"').lower())


def label_statistics(
    corpus: Corpus, vectors: Mapping[str, LocalityVector]
) -> list[FeatureStats]:
    """One row per firing feature plus the leading "All" row.

    Features with zero firing samples are omitted.
    """
    counts = {name: [0, 0] for name in FEATURE_NAMES}
    all_counts = [0, 0]
    for sample in corpus:
        if sample.id not in vectors:
            raise MissingVector(sample.id)
        if sample.label is None:
            raise ValueError(f"sample {sample.id!r} has no gold label")
        col = 0 if sample.label is Label.IDIOMATIC else 1
        all_counts[col] += 1
        vec = vectors[sample.id]
        for name in FEATURE_NAMES:
            if getattr(vec, name):
                counts[name][col] += 1

    rows = [
        FeatureStats(FEATURE_DISPLAY[name], idio + non, idio, non)
        for name, (idio, non) in counts.items()
        if idio + non > 0
    ]
    rows.sort(key=_sort_key)
    all_row = FeatureStats("All", sum(all_counts), all_counts[0], all_counts[1])
    return [all_row] + rows


def render_text(rows: list[FeatureStats]) -> str:
    """Aligned text table, diffable against the published counts."""
    header = ("Feature", "Total", "Idiomatic", "Non-idiomatic")
    cells = [header] + [
        (r.feature, str(r.total), str(r.idiomatic), str(r.non_idiomatic)) for r in rows
    ]
    widths = [max(len(c[i]) for c in cells) for i in range(4)]
    lines = []
    for c in cells:
        lines.append(
            c[0].ljust(widths[0])
            + "  "
            + "  ".join(c[i].rjust(widths[i]) for i in range(1, 4))
        )
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"


def render_csv(rows: list[FeatureStats]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["feature", "total", "idiomatic", "non_idiomatic"])
    for r in rows:
        writer.writerow([r.feature, r.total, r.idiomatic, r.non_idiomatic])
    return buf.getvalue()


def write_reports(rows: list[FeatureStats], out_dir: str | Path, stem: str = "label_stats") -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{stem}.txt").write_text(render_text(rows), encoding="utf-8")
    (out_dir / f"{stem}.csv").write_text(render_csv(rows), encoding="utf-8")
