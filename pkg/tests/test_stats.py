import pytest

from neamer.corpus import Corpus, Label, Language, Sample, Split
from neamer.locality import LocalityVector, extract_all
from neamer.stats import FeatureStats, MissingVector, label_statistics, render_csv, render_text


def test_fixture_table(fixture_corpus):
    vectors = extract_all(fixture_corpus)
    rows = label_statistics(fixture_corpus, vectors)
    assert rows[0] == FeatureStats("All", 3, 1, 2)
    by_name = {r.feature: r for r in rows[1:]}
    assert by_name['"Be a *"'] == FeatureStats('"Be a *"', 1, 1, 0)
    assert by_name["Capitalized"] == FeatureStats("Capitalized", 1, 0, 1)
    assert by_name['"The *"'] == FeatureStats('"The *"', 1, 0, 1)
    assert len(rows) == 4  # non-firing features omitted


def test_empty_corpus():
    rows = label_statistics(Corpus(samples=()), {})
    assert rows == [FeatureStats("All", 0, 0, 0)]


def test_missing_vector(fixture_corpus):
    with pytest.raises(MissingVector):
        label_statistics(fixture_corpus, {})


def test_sorted_by_total_descending(fixture_corpus):
    vectors = {
        "s1": LocalityVector(the_star=True),
        "s2": LocalityVector(the_star=True, entity=True),
        "s3": LocalityVector(entity=True),
    }
    rows = label_statistics(fixture_corpus, vectors)
    totals = [r.total for r in rows[1:]]
    assert totals == sorted(totals, reverse=True)


def test_permutation_invariance(fixture_corpus):
    vectors = extract_all(fixture_corpus)
    reordered = Corpus(samples=tuple(reversed(fixture_corpus.samples)))
    assert set(label_statistics(fixture_corpus, vectors)) == set(
        label_statistics(reordered, vectors)
    )


def test_duplication_increments_fired_rows(fixture_corpus):
    vectors = extract_all(fixture_corpus)
    dup = Sample(
        id="s1b",
        language=Language.EN,
        mwe="gold mine",
        target=fixture_corpus.samples[0].target,
        split=Split.VALIDATION,
        label=Label.IDIOMATIC,
    )
    bigger = Corpus(samples=fixture_corpus.samples + (dup,))
    vectors2 = dict(vectors, s1b=vectors["s1"])
    before = {r.feature: r for r in label_statistics(fixture_corpus, vectors)}
    after = {r.feature: r for r in label_statistics(bigger, vectors2)}
    assert after["All"].total == before["All"].total + 1
    assert after['"Be a *"'].total == before['"Be a *"'].total + 1
    assert after["Capitalized"] == before["Capitalized"]


def test_renders(fixture_corpus):
    rows = label_statistics(fixture_corpus, extract_all(fixture_corpus))
    text = render_text(rows)
    assert "All" in text and "Total" in text
    csv_text = render_csv(rows)
    assert csv_text.splitlines()[0] == "feature,total,idiomatic,non_idiomatic"
    assert '"""Be a *""",1,1,0' in csv_text
