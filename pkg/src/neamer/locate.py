"""Locate MWE occurrences inside a sentence.

Matching is deliberately shallow: whitespace tokens, edge punctuation
stripped, case-insensitive, and a bounded trailing-suffix tolerance that
covers plurals ("runs") and possessives ("Mine's") without a morphological
analyzer.
"""

from __future__ import annotations

from dataclasses import dataclass

#: Characters stripped from token edges before matching.
EDGE_PUNCT = ".,;:!?\"'“”‘’()[]&"

#: A sentence token may extend the MWE token by at most this many chars.
DEFAULT_SUFFIX_TOLERANCE = 3


@dataclass(frozen=True)
class Token:
    text: str  # after edge-punctuation stripping
    start: int  # char offset of stripped text in the source
    end: int


@dataclass(frozen=True)
class Occurrence:
    start_char: int
    end_char: int
    matched_text: str
    token_indices: tuple[int, ...]


def tokenize(text: str) -> list[Token]:
    """Whitespace tokens with edge punctuation stripped, offsets preserved.

    Tokens that are pure punctuation strip to empty and are kept (empty
    text never matches) so indices stay aligned with whitespace splitting.
    """
    tokens: list[Token] = []
    pos = 0
    for raw in text.split():
        start = text.index(raw, pos)
        pos = start + len(raw)
        lo, hi = 0, len(raw)
        while lo < hi and raw[lo] in EDGE_PUNCT:
            lo += 1
        while hi > lo and raw[hi - 1] in EDGE_PUNCT:
            hi -= 1
        tokens.append(Token(raw[lo:hi], start + lo, start + hi))
    return tokens


def _token_matches(sentence_token: str, mwe_token: str, tolerance: int) -> bool:
    s = sentence_token.lower()
    m = mwe_token.lower()
    if not s or not m:
        return False
    return s.startswith(m) and len(s) - len(m) <= tolerance


def locate(
    mwe: str,
    target: str,
    suffix_tolerance: int = DEFAULT_SUFFIX_TOLERANCE,
) -> list[Occurrence]:
    """All non-overlapping occurrences of `mwe` in `target`, left to right.

    Greedy: once a window matches, scanning resumes after it. No match
    returns an empty list; the caller decides severity.
    """
    mwe_tokens = [t.text for t in tokenize(mwe)]
    mwe_tokens = [t for t in mwe_tokens if t]
    if not mwe_tokens or not target.strip():
        return []

    tokens = tokenize(target)
    n = len(mwe_tokens)
    occurrences: list[Occurrence] = []
    i = 0
    while i + n <= len(tokens):
        window = tokens[i : i + n]
        if all(_token_matches(w.text, m, suffix_tolerance) for w, m in zip(window, mwe_tokens)):
            start, end = window[0].start, window[-1].end
            occurrences.append(
                Occurrence(
                    start_char=start,
                    end_char=end,
                    matched_text=target[start:end],
                    token_indices=tuple(range(i, i + n)),
                )
            )
            i += n
        else:
            i += 1
    return occurrences
