import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from neamer.evaluation import (
    ConfusionMatrix,
    LengthMismatch,
    SingleClass,
    confusion,
    f1_scores,
    per_feature_f1,
    roc_auc,
    roc_points_csv,
    stability_report,
)
from neamer.locality import LocalityVector
from neamer.stats import MissingVector


def brute_force_auc(gold, scores):
    """O(n^2) pair counting: positives above negatives, ties half."""
    wins = 0.0
    pairs = 0
    for (g1, s1), (g2, s2) in itertools.product(zip(gold, scores), repeat=2):
        if g1 == 1 and g2 == 0:
            pairs += 1
            if s1 > s2:
                wins += 1.0
            elif s1 == s2:
                wins += 0.5
    return wins / pairs


# --- confusion -------------------------------------------------------------


def matrix_from_counts(counts):
    gold, pred = [], []
    for g in (0, 1):
        for p in (0, 1):
            gold += [g] * counts[g][p]
            pred += [p] * counts[g][p]
    return confusion(gold, pred)


def test_entity_confusion_matrix():
    matrix = matrix_from_counts([[5, 9], [0, 117]])
    assert matrix.counts == ((5, 9), (0, 117))
    assert matrix.total == 131


def test_perfect_prediction_diagonal():
    matrix = confusion([0, 1, 1, 0], [0, 1, 1, 0])
    assert matrix[0, 1] == 0 and matrix[1, 0] == 0


def test_hand_counted_pairs():
    matrix = confusion([0, 0, 1, 1], [0, 1, 1, 0])
    assert matrix.counts == ((1, 1), (1, 1))


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        confusion([0, 1], [0])


def test_label_swap_transposes():
    gold = [0] * 5 + [1] * 5
    pred = [0, 0, 0, 1, 1, 0, 1, 1, 1, 1]
    direct = confusion(gold, pred)
    swapped = confusion([1 - g for g in gold], [1 - p for p in pred])
    assert swapped[0, 0] == direct[1, 1]
    assert swapped[0, 1] == direct[1, 0]
    assert swapped[1, 0] == direct[0, 1]
    assert swapped[1, 1] == direct[0, 0]


# --- f1 --------------------------------------------------------------------


def test_recall_delta_from_entity_matrices():
    before = f1_scores(matrix_from_counts([[5, 9], [0, 117]]))
    after = f1_scores(matrix_from_counts([[2, 12], [0, 117]]))
    assert before["recall"][0] == pytest.approx(0.357, abs=1e-3)
    assert after["recall"][0] == pytest.approx(0.143, abs=1e-3)
    assert before["recall"][0] - after["recall"][0] == pytest.approx(0.214, abs=1e-3)


def test_perfect_scores():
    scores = f1_scores(matrix_from_counts([[7, 0], [0, 13]]))
    assert scores["macro_f1"] == 1.0
    assert scores["micro_f1"] == 1.0


def test_uniform_matrix():
    scores = f1_scores(matrix_from_counts([[1, 1], [1, 1]]))
    assert scores["f1"] == [0.5, 0.5]
    assert scores["macro_f1"] == 0.5


def test_zero_division_convention():
    # no predictions for class 0 at all
    scores = f1_scores(matrix_from_counts([[0, 3], [0, 5]]))
    assert scores["f1"][0] == 0.0
    assert scores["recall"][0] == 0.0


def _reference_f1(counts):
    per = []
    for cls in (0, 1):
        tp = counts[cls][cls]
        fp = counts[1 - cls][cls]
        fn = counts[cls][1 - cls]
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        per.append(2 * p * r / (p + r) if p + r else 0.0)
    total = sum(map(sum, counts))
    return (per[0] + per[1]) / 2, (counts[0][0] + counts[1][1]) / total


def test_f1_against_reference_on_random_matrices():
    rng = random.Random(7)
    for _ in range(100):
        counts = [[rng.randint(0, 20), rng.randint(0, 20)] for _ in range(2)]
        if sum(map(sum, counts)) == 0:
            counts[0][0] = 1
        scores = f1_scores(matrix_from_counts(counts))
        macro, micro = _reference_f1(counts)
        assert scores["macro_f1"] == pytest.approx(macro)
        assert scores["micro_f1"] == pytest.approx(micro)
        assert scores["micro_f1"] == pytest.approx(
            (counts[0][0] + counts[1][1]) / sum(map(sum, counts))
        )


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=50))
def test_f1_permutation_invariant(pairs):
    gold = [g for g, _ in pairs]
    pred = [p for _, p in pairs]
    shuffled = pairs[::-1]
    a = f1_scores(confusion(gold, pred))
    b = f1_scores(confusion([g for g, _ in shuffled], [p for _, p in shuffled]))
    assert a == b


# --- per-feature -----------------------------------------------------------


def test_per_feature_all_correct():
    gold = {"a": 0, "b": 1}
    vectors = {"a": LocalityVector(be_a=True), "b": LocalityVector(be_a=True, entity=True)}
    rows, omitted = per_feature_f1(gold, dict(gold), vectors)
    assert all(r.micro_f1_percent == 100.0 for r in rows)
    assert "Quotation" in omitted


def test_per_feature_fixture_row():
    gold = {"s1": 0, "s2": 1, "s3": 1}
    pred = {"s1": 0, "s2": 1, "s3": 0}
    vectors = {
        "s1": LocalityVector(be_a=True),
        "s2": LocalityVector(),
        "s3": LocalityVector(capitalized=True, the_star=True),
    }
    rows, _ = per_feature_f1(gold, pred, vectors)
    by_name = {r.feature: r for r in rows}
    assert by_name['"Be a *"'].count == 1
    assert by_name['"Be a *"'].micro_f1_percent == 100.0
    assert by_name["Capitalized"].micro_f1_percent == 0.0


def test_per_feature_missing_vector():
    with pytest.raises(MissingVector):
        per_feature_f1({"x": 0}, {"x": 0}, {})


# --- roc -------------------------------------------------------------------


def test_perfect_separation():
    curve = roc_auc([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9])
    assert curve.auc == 1.0


def test_all_ties():
    curve = roc_auc([0, 1, 0, 1], [0.5] * 4)
    assert curve.auc == 0.5


def test_single_class():
    with pytest.raises(SingleClass):
        roc_auc([1, 1], [0.2, 0.3])


def test_hand_picked_pairs_match_oracle():
    gold = [1, 0, 1, 0, 1, 0]
    scores = [0.9, 0.9, 0.6, 0.4, 0.3, 0.3]
    curve = roc_auc(gold, scores)
    assert curve.auc == brute_force_auc(gold, scores)


def test_curve_shape():
    curve = roc_auc([0, 1, 0, 1, 1], [0.2, 0.7, 0.7, 0.9, 0.1])
    assert curve.points[0] == (0.0, 0.0)
    assert curve.points[-1] == (1.0, 1.0)
    fprs = [p[0] for p in curve.points]
    tprs = [p[1] for p in curve.points]
    assert fprs == sorted(fprs) and tprs == sorted(tprs)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_roc_matches_pairwise_oracle(data):
    n = data.draw(st.integers(2, 60))
    gold = data.draw(
        st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(lambda g: 0 < sum(g) < len(g))
    )
    # coarse grid to force ties
    scores = data.draw(
        st.lists(st.sampled_from([i / 10 for i in range(11)]), min_size=n, max_size=n)
    )
    assert roc_auc(gold, scores).auc == brute_force_auc(gold, scores)


def test_roc_csv():
    curve = roc_auc([0, 1], [0.2, 0.8])
    text = roc_points_csv(curve)
    assert text.splitlines()[0] == "threshold,fpr,tpr"
    assert len(text.splitlines()) == len(curve.points) + 1


# --- stability -------------------------------------------------------------


def test_stability_percentages():
    def runs(tag, total, failures):
        return [(tag, i, 0.9 if i >= failures else 0.4, i < failures) for i in range(total)]

    report = stability_report(runs("plain", 9, 5) + runs("eng", 9, 0) + runs("german", 9, 1))
    assert report == {"plain": 44.4, "eng": 100.0, "german": 88.9}


def test_stability_success_rates_table():
    report = stability_report([("m", i, 0.9, i < 4) for i in range(9)])
    assert report["m"] == 55.6
