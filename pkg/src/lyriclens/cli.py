"""Command-line pipeline: curate -> eda -> embed -> train -> evaluate ->
benchmark -> predict -> serve.

Every run writes a manifest (config digest, seed, versions, timestamp) under
<out>/manifests/. Report-producing commands render figures next to their
CSV output. Exit codes: 0 success, 1 failed step, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import PipelineConfig, load_config

log = logging.getLogger(__name__)


def _manifest(out_dir: Path, command: str, config: PipelineConfig, args: argparse.Namespace, **extra) -> Path:
    import sklearn
    import torch
    import transformers

    manifest_dir = out_dir / "manifests"
    manifest_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "command": command,
        "argv": [a for a in sys.argv[1:]],
        "seed": getattr(args, "seed", None) if getattr(args, "seed", None) is not None else config.seed,
        "config_digest": config.digest(),
        "config": config.to_dict(),
        "versions": {
            "lyriclens": __version__,
            "python": sys.version.split()[0],
            "torch": torch.__version__,
            "transformers": transformers.__version__,
            "scikit-learn": sklearn.__version__,
        },
        "created_at": datetime.now(timezone.utc).isoformat(),
        **extra,
    }
    path = manifest_dir / f"{command.replace('-', '_')}_manifest.json"
    path.write_text(json.dumps(payload, indent=2, default=str) + "\n", encoding="utf-8")
    return path


def _seed(args: argparse.Namespace, config: PipelineConfig) -> int:
    return args.seed if args.seed is not None else config.seed


def _load_filtered_corpus(config: PipelineConfig, corpus_flag: str | None, out_dir: Path):
    from .corpus import apply_base_filters, load_corpus, write_reject_file

    corpus_path = config.resolve_corpus(corpus_flag)
    records, report = load_corpus(corpus_path, schema=config.schema or None)
    if report.rows_rejected:
        reject_path = write_reject_file(report, out_dir / f"{corpus_path.stem}.rejects.csv")
        log.warning("%d rows rejected; reasons logged to %s", report.rows_rejected, reject_path)
    return apply_base_filters(records, config.base_filter_config()), report


def cmd_fixture(args, config: PipelineConfig) -> int:
    from .fixtures import build_mini_checkpoint, write_synthetic_corpus

    out_dir = Path(args.out)
    seed = _seed(args, config)
    written = {}
    if args.corpus_out:
        path = write_synthetic_corpus(args.corpus_out, n=args.rows, seed=seed)
        written["corpus"] = str(path)
        print(f"wrote synthetic corpus ({args.rows} rows) to {path}")
    if args.checkpoint_out:
        path = build_mini_checkpoint(args.checkpoint_out, seed=seed)
        written["checkpoint"] = str(path)
        print(f"wrote miniature pretrained checkpoint to {path}")
    if not written:
        print("nothing to do: pass --corpus-out and/or --checkpoint-out", file=sys.stderr)
        return 2
    _manifest(out_dir, "fixture", config, args, written=written)
    return 0


def cmd_curate(args, config: PipelineConfig) -> int:
    from .corpus import assign_splits, curate_genre_dataset, curate_success_dataset, curate_year_dataset, save_dataset

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = _seed(args, config)
    records, load_report = _load_filtered_corpus(config, args.corpus, out_dir)
    curate = {
        "genre": curate_genre_dataset,
        "success": curate_success_dataset,
        "year": curate_year_dataset,
    }[args.task]
    dataset = curate(records, seed=seed, config=config.curation_config())
    dataset = assign_splits(dataset, tuple(config.split_ratios), seed=seed)
    csv_path, manifest_path = save_dataset(dataset, out_dir / f"{args.task}.csv")
    _manifest(
        out_dir, "curate", config, args,
        task=args.task,
        dataset_csv=str(csv_path),
        rows_read=load_report.rows_read,
        rows_rejected=load_report.rows_rejected,
        n_records=len(dataset),
        warnings=dataset.warnings,
    )
    print(f"curated {len(dataset)} records -> {csv_path}")
    for warning in dataset.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def cmd_eda(args, config: PipelineConfig) -> int:
    from . import figures
    from .analytics import build_eda_report, load_lexicon, load_stopwords, write_eda_tables
    from .corpus import clean_lyrics, word_count
    from dataclasses import replace

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records, _ = _load_filtered_corpus(config, args.corpus, out_dir)
    cleaned = [replace(r, lyrics=clean_lyrics(r.lyrics)) for r in records]
    kept = [r for r in cleaned if word_count(r.lyrics) > config.eda_min_words]
    report = build_eda_report(kept, load_lexicon(), load_stopwords(), top_k=config.eda_top_k)
    tables = write_eda_tables(report, out_dir)
    rendered = [
        figures.genre_distribution(report.genre_counts, out_dir / "genre_distribution.png"),
        figures.sentiment_by_genre(report.sentiment_by_genre, out_dir / "sentiment_by_genre.png"),
        figures.sentiment_by_year(report.sentiment_by_year, out_dir / "sentiment_by_year.png"),
        figures.wordcount_by_genre(report.length_stats, out_dir / "wordcount_by_genre.png"),
    ]
    _manifest(
        out_dir, "eda", config, args,
        n_records=report.n_records,
        tables=[str(p) for p in tables],
        figures=[str(p) for p in rendered],
    )
    print(f"eda over {report.n_records} records -> {len(tables)} tables, {len(rendered)} figures in {out_dir}")
    return 0


def cmd_embed(args, config: PipelineConfig) -> int:
    from .corpus import load_dataset
    from .encoder import LyricsEncoder, embed_corpus

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache_stem = out_dir / "embeddings"
    dataset = load_dataset(args.dataset)
    encoder = LyricsEncoder(model_dir=config.model_dir, max_len=config.max_len)
    matrix, ids, stats = embed_corpus(encoder, dataset, cache_stem, batch_size=config.batch_size)
    _manifest(
        out_dir, "embed", config, args,
        n_rows=len(ids),
        hidden_size=matrix.shape[1],
        cache_hits=stats.hits,
        cache_misses=stats.misses,
        checkpoint_id=encoder.checkpoint_id,
        cache_stem=str(cache_stem),
    )
    print(f"embedded {len(ids)} records (H={matrix.shape[1]}, hits={stats.hits}, misses={stats.misses}) -> {cache_stem}.f32")
    return 0


def _train_classifier_command(args, config: PipelineConfig, task: str) -> int:
    from .classifier import TrainConfig, train_classifier
    from .corpus import load_dataset

    out_dir = Path(args.out)
    dataset = load_dataset(args.dataset)
    if dataset.task != task:
        raise ValueError(f"dataset at {args.dataset} is for task {dataset.task!r}, expected {task!r}")
    overrides = dict(config.train)
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.batch_size is not None:
        overrides["batch_size"] = args.batch_size
    overrides.setdefault("max_len", config.max_len)
    overrides["seed"] = _seed(args, config)
    train_config = TrainConfig(**overrides)
    artifact = train_classifier(dataset, train_config, model_dir=config.model_dir)
    artifact_dir = artifact.save(out_dir)
    _manifest(
        out_dir, f"train-{task}", config, args,
        artifact_id=artifact.artifact_id,
        artifact_dir=str(artifact_dir),
        metrics=artifact.metrics,
    )
    print(f"trained {task} classifier {artifact.artifact_id}: {json.dumps(artifact.metrics)}")
    return 0


def cmd_train_genre(args, config: PipelineConfig) -> int:
    return _train_classifier_command(args, config, "genre")


def cmd_train_success(args, config: PipelineConfig) -> int:
    return _train_classifier_command(args, config, "success")


def _embeddings_for(args, config: PipelineConfig, dataset):
    """Embedding matrix aligned with the dataset, from cache or computed."""
    from .encoder import LyricsEncoder, embed_corpus, load_embedding_matrix

    if args.embeddings:
        matrix, ids = load_embedding_matrix(args.embeddings)
        if ids != [r.id for r in dataset.records]:
            raise ValueError("embedding cache rows do not match dataset records; re-run embed")
        index = json.loads((Path(args.embeddings).with_suffix(".index")).read_text(encoding="utf-8"))
        return matrix, index.get("checkpoint_id", "")
    encoder = LyricsEncoder(model_dir=config.model_dir, max_len=config.max_len)
    cache = Path(args.out) / "embeddings"
    matrix, _, _ = embed_corpus(encoder, dataset, cache, batch_size=config.batch_size)
    return matrix, encoder.checkpoint_id


def cmd_train_year(args, config: PipelineConfig) -> int:
    from .corpus import load_dataset
    from .regressor import RegressorSpec, train_regressor

    out_dir = Path(args.out)
    dataset = load_dataset(args.dataset)
    if dataset.task != "year":
        raise ValueError(f"dataset at {args.dataset} is for task {dataset.task!r}, expected 'year'")
    matrix, checkpoint_id = _embeddings_for(args, config, dataset)
    spec = RegressorSpec(kind=args.kind, seed=_seed(args, config))
    artifact = train_regressor(matrix, [float(y) for y in dataset.labels], spec, embedding_checkpoint_id=checkpoint_id)
    artifact_dir = artifact.save(out_dir)
    _manifest(
        out_dir, "train-year", config, args,
        artifact_id=artifact.artifact_id,
        artifact_dir=str(artifact_dir),
        kind=spec.kind,
    )
    print(f"trained year regressor {artifact.artifact_id} ({spec.kind})")
    return 0


def cmd_benchmark_year(args, config: PipelineConfig) -> int:
    from . import figures
    from .corpus import load_dataset
    from .regressor import RegressorSpec, benchmark_regressors, default_specs

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = load_dataset(args.dataset)
    matrix, _ = _embeddings_for(args, config, dataset)
    seed = _seed(args, config)
    if config.regressors:
        specs = [RegressorSpec(kind=s["kind"], hyperparams=s.get("hyperparams", {}), seed=s.get("seed", seed))
                 for s in config.regressors]
    else:
        specs = default_specs(seed=seed)
    table = benchmark_regressors(matrix, [float(y) for y in dataset.labels], specs, split_seed=seed)
    csv_path = table.to_csv(out_dir / "benchmark.csv")
    text = table.to_text()
    (out_dir / "benchmark.txt").write_text(text + "\n", encoding="utf-8")
    figure_path = figures.rmse_comparison(table.rows, out_dir / "rmse_comparison.png")
    _manifest(
        out_dir, "benchmark-year", config, args,
        table_csv=str(csv_path),
        figure=str(figure_path),
        results=table.comparable(),
    )
    print(text)
    return 0


def cmd_evaluate(args, config: PipelineConfig) -> int:
    from . import figures
    from .classifier import ClassifierArtifact, evaluate_classifier
    from .corpus import load_dataset

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifact = ClassifierArtifact.load(args.artifact)
    dataset = load_dataset(args.dataset)
    result = evaluate_classifier(artifact, dataset, split=args.split)
    report_path = out_dir / f"evaluation_{artifact.task}.json"
    report_path.write_text(json.dumps(result.to_dict(), indent=2) + "\n", encoding="utf-8")
    figure_path = figures.confusion_heatmap(result.report.to_dict(), out_dir / f"confusion_{artifact.task}.png")
    _manifest(
        out_dir, "evaluate", config, args,
        artifact_id=result.artifact_id,
        report=str(report_path),
        figure=str(figure_path),
        accuracy=result.report.accuracy,
    )
    print(result.report.to_text())
    return 0


def _build_registry(args, config: PipelineConfig):
    from .service import ServiceConfig, load_registry

    artifacts_dir = Path(args.artifacts)
    paths = {}
    for task in ("genre", "success", "year"):
        candidate = artifacts_dir / task
        if candidate.exists():
            paths[task] = candidate
    service_config = ServiceConfig(
        model_dir=config.model_dir,
        artifact_paths=paths,
        max_len=config.max_len,
    )
    return load_registry(service_config)


def cmd_predict(args, config: PipelineConfig) -> int:
    lyrics = Path(args.lyrics_file).read_text(encoding="utf-8")
    registry = _build_registry(args, config)
    result = registry.predict(lyrics)
    print(json.dumps(result, indent=2))
    return 0


def cmd_serve(args, config: PipelineConfig) -> int:
    import uvicorn

    from .service import create_app

    registry = _build_registry(args, config)
    missing = registry.missing()
    if missing:
        log.warning("serving with missing artifacts: %s", missing)
    app = create_app(registry)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lyriclens",
        description="Lyric intelligence pipeline: curation, EDA, fine-tuning, regression, serving.",
    )
    parser.add_argument("--version", action="version", version=f"lyriclens {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="pipeline config JSON")
        p.add_argument("--seed", type=int, default=None, help="root seed (overrides config)")
        p.add_argument("--out", default="runs", help="output directory")

    p = sub.add_parser("fixture", help="write the synthetic corpus and/or miniature checkpoint")
    common(p)
    p.add_argument("--corpus-out", default=None, help="where to write the synthetic corpus CSV")
    p.add_argument("--rows", type=int, default=500, help="synthetic corpus size")
    p.add_argument("--checkpoint-out", default=None, help="where to write the miniature checkpoint")
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("curate", help="filter and sample a balanced task dataset")
    common(p)
    p.add_argument("--task", required=True, choices=["genre", "success", "year"])
    p.add_argument("--corpus", default=None, help="corpus CSV (or set in config / $DATA_DIR)")
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("eda", help="exploratory analysis tables and figures")
    common(p)
    p.add_argument("--corpus", default=None)
    p.set_defaults(func=cmd_eda)

    p = sub.add_parser("embed", help="embed a curated dataset into the on-disk cache")
    common(p)
    p.add_argument("--dataset", required=True, help="curated dataset CSV")
    p.set_defaults(func=cmd_embed)

    for task in ("genre", "success"):
        p = sub.add_parser(f"train-{task}", help=f"fine-tune the {task} classifier")
        common(p)
        p.add_argument("--dataset", required=True)
        p.add_argument("--epochs", type=int, default=None)
        p.add_argument("--batch-size", type=int, default=None)
        p.set_defaults(func=cmd_train_genre if task == "genre" else cmd_train_success)

    p = sub.add_parser("train-year", help="fit the year regressor on embeddings")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--embeddings", default=None, help="embedding cache stem from `embed`")
    p.add_argument("--kind", default="svr_linear")
    p.set_defaults(func=cmd_train_year)

    p = sub.add_parser("benchmark-year", help="compare the regressor families by RMSE")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--embeddings", default=None)
    p.set_defaults(func=cmd_benchmark_year)

    p = sub.add_parser("evaluate", help="classification report for a trained artifact")
    common(p)
    p.add_argument("--artifact", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", default="test", choices=["train", "validation", "test"])
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="run all three predictors on a lyrics file")
    common(p)
    p.add_argument("--lyrics-file", required=True)
    p.add_argument("--artifacts", required=True, help="directory holding genre/, success/, year/ artifacts")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="start the HTTP inference service")
    common(p)
    p.add_argument("--artifacts", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=int(os.environ.get("PORT", "8000")))
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, seed=args.seed, out=args.out)
        return args.func(args, config)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
