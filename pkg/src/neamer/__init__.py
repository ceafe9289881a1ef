"""Idiomaticity-detection workbench.

Locality-feature extraction around located MWE occurrences, a deterministic
desk-scale feature-augmented classifier with a seeded retry protocol,
checkpoint ensembling over score files, and the full evaluation surface.
"""

from .corpus import Corpus, Label, Language, Sample, Split, ingest_csv
from .kernels import BACKEND as KERNEL_BACKEND
from .locality import LocalityVector, NerSpan, extract
from .locate import Occurrence, locate

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "Label",
    "Language",
    "Sample",
    "Split",
    "ingest_csv",
    "LocalityVector",
    "NerSpan",
    "extract",
    "Occurrence",
    "locate",
    "KERNEL_BACKEND",
    "__version__",
]
