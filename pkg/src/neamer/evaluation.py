"""Metrics and error-analysis reports.

Covers macro/micro F1, per-locality-feature micro F1, confusion matrices,
ROC/AUC with the ties-half (Mann-Whitney) convention, and training-stability
success rates. Degenerate 0/0 precision/recall/F1 is defined as 0 because
tiny per-feature subsets can lack a class entirely.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .locality import FEATURE_DISPLAY, FEATURE_NAMES, LocalityVector
from .stats import MissingVector


class LengthMismatch(Exception):
    pass


class SingleClass(Exception):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[gold][pred] over the two labels."""

    counts: tuple[tuple[int, int], tuple[int, int]]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def __getitem__(self, key: tuple[int, int]) -> int:
        gold, pred = key
        return self.counts[gold][pred]


def confusion(gold: Sequence[int], pred: Sequence[int]) -> ConfusionMatrix:
    if len(gold) != len(pred):
        raise LengthMismatch(f"{len(gold)} gold vs {len(pred)} predicted")
    if len(gold) == 0:
        raise LengthMismatch("empty inputs")
    counts = [[0, 0], [0, 0]]
    for g, p in zip(gold, pred):
        counts[int(g)][int(p)] += 1
    return ConfusionMatrix(counts=tuple(tuple(row) for row in counts))


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def f1_scores(matrix: ConfusionMatrix) -> dict:
    """Per-class precision/recall/F1, macro F1, micro F1 (= accuracy here)."""
    if matrix.total == 0:
        raise ValueError("empty confusion matrix")
    precision, recall, f1 = [], [], []
    for cls in (0, 1):
        tp = matrix[cls, cls]
        fp = matrix[1 - cls, cls]
        fn = matrix[cls, 1 - cls]
        p = _safe_div(tp, tp + fp)
        r = _safe_div(tp, tp + fn)
        precision.append(p)
        recall.append(r)
        f1.append(_safe_div(2 * p * r, p + r))
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "macro_f1": (f1[0] + f1[1]) / 2.0,
        "micro_f1": (matrix[0, 0] + matrix[1, 1]) / matrix.total,
    }


@dataclass(frozen=True)
class FeatureF1Row:
    feature: str
    count: int
    micro_f1_percent: float


def per_feature_f1(
    gold: Mapping[str, int],
    pred: Mapping[str, int],
    vectors: Mapping[str, LocalityVector],
) -> tuple[list[FeatureF1Row], list[str]]:
    """Micro F1 restricted to samples where each feature fires.

    Returns (rows, omitted-feature names); zero-firing features are omitted.
    """
    rows: list[FeatureF1Row] = []
    omitted: list[str] = []
    for sid in gold:
        if sid not in vectors:
            raise MissingVector(sid)
    for name in FEATURE_NAMES:
        subset = [sid for sid in gold if getattr(vectors[sid], name)]
        if not subset:
            omitted.append(FEATURE_DISPLAY[name])
            continue
        matrix = confusion([gold[s] for s in subset], [pred[s] for s in subset])
        micro = f1_scores(matrix)["micro_f1"]
        rows.append(FeatureF1Row(FEATURE_DISPLAY[name], len(subset), round(micro * 100.0, 1)))
    rows.sort(key=lambda r: (-r.count, r.feature.strip('"').lower()))
    return rows, omitted


@dataclass(frozen=True)
class RocCurve:
    points: tuple[tuple[float, float], ...]  # (fpr, tpr) by descending threshold
    thresholds: tuple[float, ...]
    auc: float


def roc_auc(gold: Sequence[int], scores: Sequence[float]) -> RocCurve:
    """ROC over p(label=1) scores; AUC via average ranks (ties count half).

    Equivalent to the probability that a random positive outranks a random
    negative.
    """
    if len(gold) != len(scores):
        raise LengthMismatch(f"{len(gold)} gold vs {len(scores)} scores")
    gold_arr = np.asarray(gold, dtype=np.int64)
    score_arr = np.asarray(scores, dtype=np.float64)
    n_pos = int((gold_arr == 1).sum())
    n_neg = int((gold_arr == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("both classes must be present")

    # average ranks (1-based) with ties sharing their mean rank
    order = np.argsort(score_arr, kind="stable")
    ranks = np.empty(len(score_arr), dtype=np.float64)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and score_arr[order[j + 1]] == score_arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    pos_rank_sum = ranks[gold_arr == 1].sum()
    auc = (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)

    points: list[tuple[float, float]] = [(0.0, 0.0)]
    thresholds: list[float] = [float("inf")]
    tp = fp = 0
    desc = np.argsort(-score_arr, kind="stable")
    k = 0
    while k < len(desc):
        threshold = score_arr[desc[k]]
        while k < len(desc) and score_arr[desc[k]] == threshold:
            if gold_arr[desc[k]] == 1:
                tp += 1
            else:
                fp += 1
            k += 1
        points.append((fp / n_neg, tp / n_pos))
        thresholds.append(float(threshold))
    return RocCurve(points=tuple(points), thresholds=tuple(thresholds), auc=float(auc))


def roc_points_csv(curve: RocCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["threshold", "fpr", "tpr"])
    for threshold, (fpr, tpr) in zip(curve.thresholds, curve.points):
        writer.writerow([threshold, f"{fpr:.6f}", f"{tpr:.6f}"])
    return buf.getvalue()


def stability_report(runs: Sequence) -> dict[str, float]:
    """Success percentage per model tag, one-decimal rounding.

    Accepts (tag, seed, best_f1, failed) tuples or objects with those
    attributes (tag optional, defaulting to "model").
    """
    attempts: dict[str, int] = {}
    successes: dict[str, int] = {}
    for run in runs:
        if isinstance(run, tuple):
            if len(run) == 4:
                tag, _, _, failed = run
            else:
                tag, failed = "model", run[-1]
        else:
            tag = getattr(run, "tag", "model")
            failed = run.failed
        attempts[tag] = attempts.get(tag, 0) + 1
        successes[tag] = successes.get(tag, 0) + (0 if failed else 1)
    return {tag: round(100.0 * successes[tag] / attempts[tag], 1) for tag in attempts}
