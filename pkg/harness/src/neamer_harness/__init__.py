"""Transformer harness: NER span export and fine-tuning runs.

Talks to the workbench core only through its file formats (corpus CSV,
span/feature/score JSONL, checkpoint metadata JSON); it never computes
metrics itself.
"""

__version__ = "0.1.0"
