"""Command-line entry point: the pipeline as subcommands.

Exit codes: 0 success, 1 validation error, 2 I/O error. Outputs are
byte-stable across reruns unless --stamp is passed.
"""

from __future__ import annotations

import datetime
import functools
import json
import sys
from pathlib import Path

import click

from . import ensemble as ens
from . import evaluation as ev
from . import locality, model, stats
from .config import ConfigError, load_config
from .corpus import Corpus, CorpusError, Language, Split, export_csv, ingest_csv

SPLIT_CHOICES = [s.value for s in Split]


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (CorpusError, ConfigError, stats.MissingVector, ev.LengthMismatch,
                ev.SingleClass, ens.NotEnoughCheckpoints, ens.EmptyGroup,
                ens.IdMismatch, ValueError) as exc:
            _fail(1, str(exc))
        except OSError as exc:
            _fail(2, str(exc))

    return wrapper


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="YAML run config (falls back to $NEAMER_CONFIG).")
@click.pass_context
def main(ctx, config_path):
    """Idiomaticity-detection workbench."""
    ctx.obj = load_config(config_path)


def _resolve_csv(cfg, csv_path, split):
    if csv_path:
        return csv_path
    if split in cfg.datasets:
        return cfg.datasets[split]
    raise ConfigError(f"no CSV given and no datasets.{split} in config")


def _load_corpus(cfg, csv_path, split) -> Corpus:
    return ingest_csv(_resolve_csv(cfg, csv_path, split), cfg.column_mapping, Split(split))


def _load_vectors(cfg, corpus, features_path, ner_path, split):
    if features_path:
        vectors = locality.read_feature_vectors(features_path)
    else:
        ner = {}
        ner_file = ner_path or cfg.ner_spans.get(split)
        if ner_file:
            ner = locality.read_ner_spans(ner_file)
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", locality.EmptyOccurrencesWarning)
            vectors = locality.extract_all(corpus, ner, cfg.lexicon)
    return vectors


@main.command()
@click.option("--csv", "csv_path", type=click.Path(exists=True), default=None)
@click.option("--split", type=click.Choice(SPLIT_CHOICES), default="zeroshot_train")
@click.option("--out", type=click.Path(), required=True, help="Validated CSV export path.")
@click.pass_obj
@handle_errors
def ingest(cfg, csv_path, split, out):
    """Validate a dataset CSV and re-export it."""
    corpus = _load_corpus(cfg, csv_path, split)
    export_csv(corpus, out)
    click.echo(f"ingested {len(corpus)} samples from {corpus.source} -> {out}")


@main.command()
@click.option("--csv", "csv_path", type=click.Path(exists=True), default=None)
@click.option("--split", type=click.Choice(SPLIT_CHOICES), default="zeroshot_train")
@click.option("--ner", "ner_path", type=click.Path(exists=True), default=None,
              help="NER spans JSONL ({id, spans}).")
@click.option("--out", type=click.Path(), required=True, help="Feature-vector JSONL path.")
@click.pass_obj
@handle_errors
def features(cfg, csv_path, split, ner_path, out):
    """Compute locality feature vectors for a corpus."""
    corpus = _load_corpus(cfg, csv_path, split)
    vectors = _load_vectors(cfg, corpus, None, ner_path, split)
    locality.write_feature_vectors(vectors, out)
    click.echo(f"wrote {len(vectors)} feature vectors -> {out}")


@main.command(name="stats")
@click.option("--csv", "csv_path", type=click.Path(exists=True), default=None)
@click.option("--split", type=click.Choice(SPLIT_CHOICES), default="zeroshot_train")
@click.option("--features", "features_path", type=click.Path(exists=True), default=None)
@click.option("--ner", "ner_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.pass_obj
@handle_errors
def stats_cmd(cfg, csv_path, split, features_path, ner_path, out_dir):
    """Per-feature label statistics report (text + CSV)."""
    corpus = _load_corpus(cfg, csv_path, split)
    vectors = _load_vectors(cfg, corpus, features_path, ner_path, split)
    rows = stats.label_statistics(corpus, vectors)
    stats.write_reports(rows, out_dir)
    click.echo(stats.render_text(rows), nl=False)


@main.command()
@click.option("--train-csv", type=click.Path(exists=True), default=None)
@click.option("--valid-csv", type=click.Path(exists=True), default=None)
@click.option("--train-split", type=click.Choice(SPLIT_CHOICES), default="zeroshot_train")
@click.option("--seed", type=int, multiple=True, help="Override the seed schedule.")
@click.option("--epochs", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.pass_obj
@handle_errors
def train(cfg, train_csv, valid_csv, train_split, seed, epochs, out_dir):
    """Train the baseline with the retry protocol; emit params + scores."""
    mcfg = cfg.model
    if epochs is not None:
        from dataclasses import replace

        mcfg = replace(mcfg, epochs=epochs)
    if seed:
        from dataclasses import replace

        mcfg = replace(mcfg, seeds=tuple(seed))

    train_corpus = _load_corpus(cfg, train_csv, train_split)
    valid_corpus = _load_corpus(cfg, valid_csv, "validation")
    train_vectors = _load_vectors(cfg, train_corpus, None, None, train_split)
    valid_vectors = _load_vectors(cfg, valid_corpus, None, None, "validation")
    train_data = model.build_training_data(train_corpus, train_vectors, mcfg)
    valid_data = model.build_training_data(valid_corpus, valid_vectors, mcfg)

    runs = model.train_with_retry(mcfg, train_data, valid_data)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    metas = []
    valid_by_id = valid_corpus.by_id()
    for run in runs:
        model_id = f"ngram-seed{run.seed}"
        if run.params is not None:
            model.save_params(run.params, out / f"{model_id}.npz")
            probs = model.batch_probs(
                run.params, model.Batch(valid_data.ids_list, valid_data.feats, valid_data.labels)
            )
            records = [
                ens.ScoreRecord(
                    sample_id=sid,
                    model_id=model_id,
                    p_nonidiomatic=float(p[1]),
                    language=valid_by_id[sid].language,
                    split=Split.VALIDATION,
                )
                for sid, p in zip(valid_data.sample_ids, probs)
            ]
            ens.write_scores(records, out / f"{model_id}.scores.jsonl")
        metas.append(
            ens.CheckpointMeta(
                model_id=model_id,
                language_target=valid_corpus.samples[0].language if len(valid_corpus) else Language.EN,
                validation_f1=run.best_f1,
                tags=("retry",) if run.retry else (),
            )
        )
        status = "FAILED" if run.failed else "ok"
        click.echo(f"seed {run.seed}: best validation F1 {run.best_f1:.4f} [{status}]")
    ens.write_metas(metas, out / "checkpoints.json")
    report = ev.stability_report([("baseline", r.seed, r.best_f1, r.failed) for r in runs])
    (out / "stability.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    click.echo(f"success rate: {report['baseline']}%")


@main.command(name="eval")
@click.option("--gold-csv", type=click.Path(exists=True), default=None)
@click.option("--split", type=click.Choice(SPLIT_CHOICES), default="validation")
@click.option("--scores", "scores_path", type=click.Path(exists=True), required=True)
@click.option("--features", "features_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--stamp", is_flag=True, help="Include a timestamp in reports.")
@click.pass_obj
@handle_errors
def eval_cmd(cfg, gold_csv, split, scores_path, features_path, out_dir, stamp):
    """Metric reports for a score file against gold labels."""
    corpus = _load_corpus(cfg, gold_csv, split)
    gold = {sid: int(label) for sid, label in corpus.labels().items()}
    records = ens.read_scores(scores_path)
    grouped = ens.group_records(records)
    preds = ens.combine(grouped, ens.Strategy.MEAN_SCORE)

    ids = sorted(gold)
    missing = [sid for sid in ids if sid not in preds]
    if missing:
        raise ValueError(f"{len(missing)} gold samples missing from scores, e.g. {missing[0]!r}")
    gold_list = [gold[sid] for sid in ids]
    pred_list = [int(preds[sid].label) for sid in ids]
    matrix = ev.confusion(gold_list, pred_list)
    scores_summary = ev.f1_scores(matrix)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    if stamp:
        lines.append(f"generated: {datetime.datetime.now().isoformat()}")
    lines += [
        f"samples: {matrix.total}",
        f"confusion: {matrix.counts}",
        f"macro F1: {scores_summary['macro_f1'] * 100:.1f}",
        f"micro F1: {scores_summary['micro_f1'] * 100:.1f}",
        f"recall (idiomatic): {scores_summary['recall'][0]:.3f}",
        f"recall (non-idiomatic): {scores_summary['recall'][1]:.3f}",
    ]
    if features_path:
        vectors = locality.read_feature_vectors(features_path)
        rows, omitted = ev.per_feature_f1(gold, {sid: pred_list[i] for i, sid in enumerate(ids)}, vectors)
        lines.append("per-feature micro F1:")
        for row in rows:
            lines.append(f"  {row.feature} ({row.count}): {row.micro_f1_percent}")
        if omitted:
            lines.append(f"  omitted (no firing samples): {', '.join(omitted)}")
    score_list = [preds[sid].score for sid in ids]
    try:
        curve = ev.roc_auc(gold_list, score_list)
        lines.append(f"AUC: {curve.auc:.3f}")
        (out / "roc.csv").write_text(ev.roc_points_csv(curve), encoding="utf-8")
    except ev.SingleClass:
        lines.append("AUC: undefined (single class)")
    report = "\n".join(lines) + "\n"
    (out / "metrics.txt").write_text(report, encoding="utf-8")
    click.echo(report, nl=False)


@main.command(name="ensemble")
@click.option("--metas", "metas_path", type=click.Path(exists=True), default=None)
@click.option("--scores", "scores_path", type=click.Path(exists=True), required=True)
@click.option("--strategy", type=click.Choice([s.value for s in ens.Strategy]),
              default="mean_score")
@click.option("--k", type=int, default=None, help="Top-k checkpoint selection.")
@click.option("--language", type=click.Choice([l.value for l in Language]), default=None)
@click.option("--out", type=click.Path(), required=True)
@click.pass_obj
@handle_errors
def ensemble_cmd(cfg, metas_path, scores_path, strategy, k, language, out):
    """Combine checkpoint score files into final predictions."""
    records = ens.read_scores(scores_path)
    model_ids = None
    if k is not None:
        metas_file = metas_path or cfg.checkpoint_metas
        if metas_file is None:
            raise ConfigError("--k requires --metas (or checkpoint_metas in config)")
        if language is None:
            raise ConfigError("--k requires --language")
        metas = ens.read_metas(metas_file)
        model_ids = ens.select_topk(metas, k, Language(language))
    grouped = ens.group_records(records, model_ids)
    preds = ens.combine(grouped, ens.Strategy(strategy))
    ens.write_predictions(dict(sorted(preds.items())), out)
    click.echo(f"combined {len(preds)} samples ({strategy}) -> {out}")


@main.command()
@click.option("--a", "a_path", type=click.Path(exists=True), required=True)
@click.option("--b", "b_path", type=click.Path(exists=True), required=True)
@click.option("--gold-csv", type=click.Path(exists=True), default=None)
@click.option("--split", type=click.Choice(SPLIT_CHOICES), default="validation")
@click.option("--features", "features_path", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), required=True)
@click.pass_obj
@handle_errors
def diff(cfg, a_path, b_path, gold_csv, split, features_path, out):
    """Improvement/regression report between two prediction files."""
    corpus = _load_corpus(cfg, gold_csv, split)
    a = ens.read_predictions(a_path)
    b = ens.read_predictions(b_path)
    vectors = locality.read_feature_vectors(features_path) if features_path else None
    report = ens.diff_predictions(a, b, corpus, vectors)

    def fmt(item):
        feats = ""
        if item.vector is not None:
            firing = [n for n in locality.FEATURE_NAMES if getattr(item.vector, n)]
            feats = f" features={','.join(firing) or '-'}"
        return (f"  {item.sample_id}: gold={int(item.gold)} "
                f"a={int(item.a_label)} b={int(item.b_label)}{feats}")

    lines = [f"improvements ({len(report.improvements)}):"]
    lines += [fmt(i) for i in report.improvements]
    lines.append(f"regressions ({len(report.regressions)}):")
    lines += [fmt(i) for i in report.regressions]
    text = "\n".join(lines) + "\n"
    Path(out).write_text(text, encoding="utf-8")
    click.echo(text, nl=False)


if __name__ == "__main__":
    main()
