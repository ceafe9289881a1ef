# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled n-gram hashing kernel; bit-identical to the Python fallback."""

import numpy as np

cimport cython
from libc.stdint cimport uint64_t, uint32_t, int64_t

cdef uint64_t FNV_OFFSET = 0xCBF29CE484222325UL
cdef uint64_t FNV_PRIME = 0x100000001B3UL


cdef inline uint64_t _mix(uint64_t h, uint32_t cp) nogil:
    cdef int shift
    for shift in range(0, 32, 8):
        h ^= (cp >> shift) & 0xFF
        h *= FNV_PRIME
    return h


def ngram_bucket_ids(str text, tuple ns=(3, 4, 5), int buckets=4096):
    """Bucket ids of all character n-grams of `text`, for each n in `ns`."""
    cdef Py_ssize_t length = len(text)
    cdef uint32_t[::1] cps = np.empty(max(length, 1), dtype=np.uint32)
    cdef Py_ssize_t i, j
    for i in range(length):
        cps[i] = ord(text[i])

    cdef Py_ssize_t total = 0
    cdef int n
    for n in ns:
        if length >= n:
            total += length - n + 1
    cdef bint whole = total == 0 and length > 0
    if whole:
        total = 1

    out = np.empty(total, dtype=np.int64)
    cdef int64_t[::1] out_view = out
    cdef uint64_t h
    cdef Py_ssize_t k = 0
    if whole:
        h = FNV_OFFSET
        for i in range(length):
            h = _mix(h, cps[i])
        out_view[0] = <int64_t>(h % <uint64_t>buckets)
        return out
    for n in ns:
        for i in range(length - n + 1):
            h = FNV_OFFSET
            for j in range(i, i + n):
                h = _mix(h, cps[j])
            out_view[k] = <int64_t>(h % <uint64_t>buckets)
            k += 1
    return out
