"""Compare the compiled n-gram hashing kernel against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [n_sentences]
"""

import random
import string
import sys
import time

from neamer.kernels import BACKEND
from neamer.kernels._ngram_py import ngram_bucket_ids as py_kernel

try:
    from neamer.kernels._ngram_cy import ngram_bucket_ids as cy_kernel
except ImportError:
    cy_kernel = None


def make_corpus(n, seed=0):
    rng = random.Random(seed)
    sentences = []
    for _ in range(n):
        words = [
            "".join(rng.choices(string.ascii_lowercase, k=rng.randint(2, 10)))
            for _ in range(rng.randint(8, 25))
        ]
        sentences.append(" ".join(words))
    return sentences


def bench(kernel, corpus, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for sentence in corpus:
            kernel(sentence)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
    corpus = make_corpus(n)
    print(f"active backend: {BACKEND}; {n} sentences, ngrams (3,4,5), 4096 buckets")

    py_time = bench(py_kernel, corpus)
    print(f"pure python : {py_time:.3f}s ({n / py_time:,.0f} sentences/s)")
    if cy_kernel is None:
        print("cython      : extension not built")
        return
    import numpy as np

    for sentence in corpus[:50]:
        assert np.array_equal(py_kernel(sentence), cy_kernel(sentence)), "backends diverge"
    cy_time = bench(cy_kernel, corpus)
    print(f"cython      : {cy_time:.3f}s ({n / cy_time:,.0f} sentences/s)")
    print(f"speedup     : {py_time / cy_time:.1f}x")


if __name__ == "__main__":
    main()
