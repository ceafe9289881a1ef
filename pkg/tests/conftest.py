import csv

import pytest

from neamer.corpus import Corpus, Label, Language, Sample, Split

# The three dataset rows used throughout: an idiomatic "gold mine", a
# literal one inside a quoted hashtag, and a restaurant name (entity-like).
FIXTURE_ROWS = [
    {
        "ID": "s1",
        "Language": "EN",
        "MWE": "gold mine",
        "Previous": "",
        "Target": "This means that search data is a gold mine for marketing strategy.",
        "Next": "",
        "Label": "0",
    },
    {
        "ID": "s2",
        "Language": "EN",
        "MWE": "gold mine",
        "Previous": "",
        "Target": "The hashtag “Qixia gold mine incident” has been viewed many million of"
        " times on the social media site Weibo.",
        "Next": "",
        "Label": "1",
    },
    {
        "ID": "s3",
        "Language": "EN",
        "MWE": "gold mine",
        "Previous": "",
        "Target": "The Gold Mine’s plain frontage & sparse, white-walled dining room suggest"
        " that it’s a quick-fix refuelling stop rather than a place to linger.",
        "Next": "",
        "Label": "1",
    },
]


def write_fixture_csv(path, rows=None):
    rows = FIXTURE_ROWS if rows is None else rows
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(FIXTURE_ROWS[0]))
        writer.writeheader()
        writer.writerows(rows)
    return path


@pytest.fixture
def fixture_csv(tmp_path):
    return write_fixture_csv(tmp_path / "fixture.csv")


@pytest.fixture
def fixture_corpus():
    samples = tuple(
        Sample(
            id=row["ID"],
            language=Language.EN,
            mwe=row["MWE"],
            target=row["Target"],
            split=Split.VALIDATION,
            label=Label(int(row["Label"])),
        )
        for row in FIXTURE_ROWS
    )
    return Corpus(samples=samples)
