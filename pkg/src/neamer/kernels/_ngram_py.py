"""Pure-Python reference for the n-gram hashing kernel."""

from __future__ import annotations

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def _fnv1a(code_points: list[int]) -> int:
    h = _FNV_OFFSET
    for cp in code_points:
        for shift in (0, 8, 16, 24):
            h ^= (cp >> shift) & 0xFF
            h = (h * _FNV_PRIME) & _MASK
    return h


def ngram_bucket_ids(text: str, ns: tuple[int, ...] = (3, 4, 5), buckets: int = 4096) -> np.ndarray:
    """Bucket ids of all character n-grams of `text`, for each n in `ns`.

    A text shorter than every n hashes once as a whole so the result is
    never empty for non-empty input.
    """
    cps = [ord(c) for c in text]
    ids: list[int] = []
    for n in ns:
        for i in range(len(cps) - n + 1):
            ids.append(_fnv1a(cps[i : i + n]) % buckets)
    if not ids and cps:
        ids.append(_fnv1a(cps) % buckets)
    return np.asarray(ids, dtype=np.int64)
