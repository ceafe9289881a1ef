"""Harness CLI: span export and fine-tuning runs."""

from __future__ import annotations

import sys

import click

from .config import HarnessConfig, HarnessConfigError, load_harness_config
from .data import MalformedCorpus
from .ner_export import CheckpointUnavailable, export_ner_spans


@click.group()
def main():
    """Transformer harness for the idiomaticity workbench."""


@main.command()
@click.option("--checkpoint", required=True, help="Token-classification model id or path.")
@click.option("--csv", "corpus_csv", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True, help="Span JSONL path.")
@click.option("--unlabeled", is_flag=True, help="Corpus has no Label column (test split).")
@click.option("--max-length", type=int, default=256)
def ner(checkpoint, corpus_csv, out, unlabeled, max_length):
    """Export NER spans for a corpus."""
    try:
        n = export_ner_spans(checkpoint, corpus_csv, out,
                             labeled=not unlabeled, max_length=max_length)
    except (MalformedCorpus, CheckpointUnavailable) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"wrote spans for {n} samples -> {out}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True,
              help="Harness YAML (checkpoint, epochs, seeds, ...).")
@click.option("--train-csv", type=click.Path(exists=True), required=True)
@click.option("--valid-csv", type=click.Path(exists=True), required=True)
@click.option("--test-csv", type=click.Path(exists=True), default=None)
@click.option("--features", "features_jsonl", type=click.Path(exists=True), default=None)
@click.option("--tag", default="xfmr", help="Model id prefix in score files.")
@click.option("--out", "out_dir", type=click.Path(), required=True)
def finetune(config_path, train_csv, valid_csv, test_csv, features_jsonl, tag, out_dir):
    """Fine-tune with the seed/retry schedule; emit score + metadata files."""
    from .finetune import finetune_and_score

    try:
        config = load_harness_config(config_path)
        outcomes = finetune_and_score(
            config, train_csv, valid_csv, out_dir,
            test_csv=test_csv, features_jsonl=features_jsonl, model_tag=tag,
        )
    except (MalformedCorpus, HarnessConfigError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    for outcome in outcomes:
        status = "FAILED" if outcome.failed else "ok"
        click.echo(f"seed {outcome.seed}: best validation F1 {outcome.best_f1:.4f} [{status}]")


if __name__ == "__main__":
    main()
