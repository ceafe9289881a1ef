"""Hashed character n-gram kernel, compiled when available.

The Cython extension and the pure-Python fallback compute identical bucket
ids (64-bit FNV-1a over code points). Set NEAMER_FORCE_PYTHON_KERNELS=1 to
force the fallback; `BACKEND` records which one is live.
"""

import os

if os.environ.get("NEAMER_FORCE_PYTHON_KERNELS") == "1":
    from ._ngram_py import ngram_bucket_ids

    BACKEND = "python"
else:
    try:
        from ._ngram_cy import ngram_bucket_ids  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from ._ngram_py import ngram_bucket_ids  # type: ignore[no-redef]

        BACKEND = "python"

__all__ = ["ngram_bucket_ids", "BACKEND"]
