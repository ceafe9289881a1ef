"""Builds the optional Cython n-gram hashing kernel.

The package works without the extension (a pure-Python fallback is selected
at import time), so any build failure here is non-fatal.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/neamer/kernels/_ngram_cy.pyx"],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"cython unavailable, building pure-python only: {exc}")

setup(ext_modules=ext_modules)
