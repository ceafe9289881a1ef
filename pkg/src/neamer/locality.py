"""The six locality features computed around each MWE occurrence.

Each feature is a boolean OR over all located occurrences:

  entity       occurrence span and an external NER span contain one another
  capitalized  a word of the occurrence is intentionally capitalized
  be_a         the two preceding tokens are a be-verb then an article
  the_star     the preceding token is a definite article
  quotation    quote characters immediately before and after
  parenthesis  "(" immediately before and ")" immediately after
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Language, Sample
from .locate import Occurrence, tokenize

FEATURE_NAMES = ("entity", "capitalized", "be_a", "the_star", "quotation", "parenthesis")

#: Display names matching the statistics report rows.
FEATURE_DISPLAY = {
    "entity": "Entity",
    "capitalized": "Capitalized",
    "be_a": '"Be a *"',
    "the_star": '"The *"',
    "quotation": "Quotation",
    "parenthesis": "Parenthesis",
}

QUOTE_CHARS = set("'\"“”‘’")


class EmptyOccurrencesWarning(UserWarning):
    """A sample had no located MWE occurrence; its vector is all false."""


@dataclass(frozen=True)
class NerSpan:
    start_char: int
    end_char: int
    tag: str

    def __post_init__(self) -> None:
        if not 0 <= self.start_char < self.end_char:
            raise ValueError(f"bad NER span [{self.start_char}, {self.end_char})")


@dataclass(frozen=True)
class LocalityVector:
    entity: bool = False
    capitalized: bool = False
    be_a: bool = False
    the_star: bool = False
    quotation: bool = False
    parenthesis: bool = False

    def to_list(self) -> list[int]:
        return [int(getattr(self, name)) for name in FEATURE_NAMES]

    @classmethod
    def from_list(cls, values: Sequence[int]) -> "LocalityVector":
        if len(values) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} feature slots, got {len(values)}")
        return cls(**{name: bool(v) for name, v in zip(FEATURE_NAMES, values)})


# The paper's examples are English; the Portuguese/Galician word lists are a
# config decision and can be overridden per deployment.
_EN_BE = ("am", "is", "are", "was", "were", "be", "been", "being")
_PT_BE = (
    "sou", "és", "é", "somos", "sois", "são",
    "era", "eras", "éramos", "eram", "fui", "foste", "foi", "fomos", "foram",
    "ser", "sendo", "sido",
    "estou", "estás", "está", "estamos", "estais", "estão",
    "estava", "estavas", "estávamos", "estavam", "estar", "estando", "estado",
)


@dataclass(frozen=True)
class LocalityLexicon:
    """Per-language word lists used by be_a / the_star."""

    be_verbs: Mapping[Language, tuple[str, ...]] = field(
        default_factory=lambda: {
            Language.EN: _EN_BE,
            Language.PT: _PT_BE,
            Language.GL: _PT_BE,
        }
    )
    articles: Mapping[Language, tuple[str, ...]] = field(
        default_factory=lambda: {
            Language.EN: ("a", "an"),
            Language.PT: ("um", "uma"),
            Language.GL: ("un", "unha", "um", "uma"),
        }
    )
    # Contractions (do/da/no/na) deliberately excluded by default.
    determiners: Mapping[Language, tuple[str, ...]] = field(
        default_factory=lambda: {
            Language.EN: ("the",),
            Language.PT: ("o", "a", "os", "as"),
            Language.GL: ("o", "a", "os", "as"),
        }
    )


DEFAULT_LEXICON = LocalityLexicon()


def _spans_interlock(occ: Occurrence, span: NerSpan) -> bool:
    # containment in either direction, character intervals
    return (span.start_char <= occ.start_char and occ.end_char <= span.end_char) or (
        occ.start_char <= span.start_char and span.end_char <= occ.end_char
    )


def _entity(occ: Occurrence, ner: Sequence[NerSpan]) -> bool:
    return any(_spans_interlock(occ, span) for span in ner)


def _capitalized(sample: Sample, occ: Occurrence, tokens) -> bool:
    mwe_tokens = [t.text for t in tokenize(sample.mwe) if t.text]
    for k, idx in enumerate(occ.token_indices):
        word = tokens[idx].text
        if not word or not word[0].isupper():
            continue
        if idx == 0:
            continue  # sentence-initial capitalization is not intentional
        if k < len(mwe_tokens) and mwe_tokens[k][:1].isupper():
            continue  # MWE itself is capitalized in the dataset
        return True
    return False


def _be_a(sample: Sample, occ: Occurrence, tokens, lexicon: LocalityLexicon) -> bool:
    first = occ.token_indices[0]
    if first < 2:
        return False
    be = tokens[first - 2].text.lower()
    art = tokens[first - 1].text.lower()
    return be in lexicon.be_verbs.get(sample.language, ()) and art in lexicon.articles.get(
        sample.language, ()
    )


def _the_star(sample: Sample, occ: Occurrence, tokens, lexicon: LocalityLexicon) -> bool:
    first = occ.token_indices[0]
    if first < 1:
        return False
    return tokens[first - 1].text.lower() in lexicon.determiners.get(sample.language, ())


def _adjacent_chars(target: str, occ: Occurrence) -> tuple[str, str]:
    """Chars immediately before/after the occurrence, skipping one space each."""
    i = occ.start_char - 1
    if i >= 0 and target[i] == " ":
        i -= 1
    j = occ.end_char
    if j < len(target) and target[j] == " ":
        j += 1
    before = target[i] if i >= 0 else ""
    after = target[j] if j < len(target) else ""
    return before, after


def _quotation(target: str, occ: Occurrence) -> bool:
    before, after = _adjacent_chars(target, occ)
    return before in QUOTE_CHARS and after in QUOTE_CHARS


def _parenthesis(target: str, occ: Occurrence) -> bool:
    before, after = _adjacent_chars(target, occ)
    return before == "(" and after == ")"


def extract(
    sample: Sample,
    occurrences: Sequence[Occurrence],
    ner: Sequence[NerSpan] = (),
    lexicon: LocalityLexicon = DEFAULT_LEXICON,
) -> LocalityVector:
    """Compute the locality vector for one sample.

    Zero occurrences is a warning, not a failure: the all-false vector is
    still well defined.
    """
    if not occurrences:
        warnings.warn(
            f"sample {sample.id!r}: no MWE occurrence located; all features false",
            EmptyOccurrencesWarning,
            stacklevel=2,
        )
        return LocalityVector()

    tokens = tokenize(sample.target)
    return LocalityVector(
        entity=any(_entity(o, ner) for o in occurrences),
        capitalized=any(_capitalized(sample, o, tokens) for o in occurrences),
        be_a=any(_be_a(sample, o, tokens, lexicon) for o in occurrences),
        the_star=any(_the_star(sample, o, tokens, lexicon) for o in occurrences),
        quotation=any(_quotation(sample.target, o) for o in occurrences),
        parenthesis=any(_parenthesis(sample.target, o) for o in occurrences),
    )


# ---------------------------------------------------------------------------
# JSON-lines wire formats


def read_ner_spans(path: str | Path) -> dict[str, list[NerSpan]]:
    """One object per line: {"id": str, "spans": [{"start","end","tag"}]}."""
    result: dict[str, list[NerSpan]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            result[obj["id"]] = [
                NerSpan(start_char=s["start"], end_char=s["end"], tag=s["tag"])
                for s in obj["spans"]
            ]
    return result


def write_feature_vectors(vectors: Mapping[str, LocalityVector], path: str | Path) -> None:
    """One object per line: {"id": str, "features": [6 ints]}."""
    with open(path, "w", encoding="utf-8") as fh:
        for sample_id, vec in vectors.items():
            fh.write(json.dumps({"id": sample_id, "features": vec.to_list()}) + "\n")


def read_feature_vectors(path: str | Path) -> dict[str, LocalityVector]:
    result: dict[str, LocalityVector] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            result[obj["id"]] = LocalityVector.from_list(obj["features"])
    return result


def extract_all(
    samples: Iterable[Sample],
    ner_by_id: Mapping[str, Sequence[NerSpan]] | None = None,
    lexicon: LocalityLexicon = DEFAULT_LEXICON,
) -> dict[str, LocalityVector]:
    """Locate + extract for a whole corpus. Features look at the target only."""
    from .locate import locate

    ner_by_id = ner_by_id or {}
    vectors: dict[str, LocalityVector] = {}
    for sample in samples:
        occurrences = locate(sample.mwe, sample.target)
        vectors[sample.id] = extract(sample, occurrences, ner_by_id.get(sample.id, ()), lexicon)
    return vectors
