import pytest

from neamer_harness.data import MalformedCorpus
from neamer_harness.ner_export import _group_spans, export_ner_spans

from harness_fixtures import make_rows

# the primary workbench's parsers, used to verify the wire format
from neamer.locality import read_ner_spans


def test_export_parses_through_primary(tiny_checkpoints, slice_files, tmp_path):
    out = tmp_path / "spans.jsonl"
    n = export_ner_spans(tiny_checkpoints["ner"], slice_files["train"], out)
    assert n == 20
    spans = read_ner_spans(out)  # raises on any format violation
    assert len(spans) == 20
    rows = make_rows(20)
    targets = {r["ID"]: r["Target"] for r in rows}
    for sid, sample_spans in spans.items():
        for span in sample_spans:
            assert 0 <= span.start_char < span.end_char <= len(targets[sid])


def test_malformed_corpus_no_partial_output(tiny_checkpoints, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("ID,Language,MWE,Target,Label\nx,EN,gold mine,a gold mine,7\n",
                   encoding="utf-8")
    out = tmp_path / "spans.jsonl"
    with pytest.raises(MalformedCorpus):
        export_ner_spans(tiny_checkpoints["ner"], bad, out)
    assert not out.exists()


def test_group_spans_bio():
    labels = ["O", "B-ORG", "I-ORG", "O", "B-LOC"]
    offsets = [(0, 0), (4, 8), (9, 13), (14, 16), (17, 23)]
    spans = _group_spans(labels, offsets)
    assert spans == [
        {"start": 4, "end": 13, "tag": "ORG"},
        {"start": 17, "end": 23, "tag": "LOC"},
    ]


def test_group_spans_all_o():
    assert _group_spans(["O", "O"], [(0, 2), (3, 5)]) == []


def test_group_spans_tag_change_splits():
    labels = ["I-ORG", "I-LOC"]
    offsets = [(0, 3), (4, 7)]
    assert len(_group_spans(labels, offsets)) == 2
