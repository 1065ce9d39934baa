"""Command-line entry points for the full pipeline.

Subcommands: synth, extract, train, cv, ablate, predict, serve. Every flag is
mirrored by an environment variable (flag wins): PORT, MODEL_PATH, and
RESOURCE_DIR by those names, everything else as SOPEVAL_<FLAG>. Exit codes:
0 success, 1 pipeline error, 2 usage or missing input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import synthetic
from .classifiers import load_model, save_model
from .corpus import build_reference, load_corpus
from .embeddings import load_embeddings
from .errors import SopevalError
from .evaluation import (
    ClassifierSpec,
    ablate,
    cross_validate,
    render_grid_delimited,
    render_grid_text,
    render_metrics_delimited,
    render_metrics_text,
    train_model,
)
from .features import (
    FeatureConfig,
    Featurizer,
    PipelineResources,
    evaluation_matrix,
    export_matrix,
    save_config,
    training_matrix,
)
from .service import ServiceState, evaluate_essay, serve
from .textual import load_lexical_resources

_KIND_CHOICES = ("svm", "lr", "rfdt", "mlp", "ffnn")


def _env(*names: str):
    for name in names:
        value = os.environ.get(name)
        if value is not None:
            return value
    return None


def _require(parser: argparse.ArgumentParser, value, flag: str):
    if value is None:
        parser.error(f"missing required flag {flag} (or its environment variable)")
    return value


def _require_file(parser: argparse.ArgumentParser, value, flag: str):
    if value is None:
        return None
    if not Path(value).exists():
        parser.error(f"{flag}: path not found: {value}")
    return value


def _add_resource_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--resources",
        default=_env("RESOURCE_DIR", "SOPEVAL_RESOURCES"),
        help="directory with the five lexical resource files (default: bundled)",
    )
    sub.add_argument(
        "--embeddings",
        default=_env("SOPEVAL_EMBEDDINGS"),
        help="word-vector text file backing the WE set and the OOV count",
    )
    sub.add_argument(
        "--glove",
        default=_env("SOPEVAL_GLOVE"),
        help="word-vector text file for adjacent-sentence similarity (may equal --embeddings)",
    )


def _add_feature_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--sets", default=_env("SOPEVAL_SETS") or "T,WE,SE",
                     help="comma-separated feature sets from T,WE,SE")
    sub.add_argument("--ne-count", action="store_true",
                     help="include the named-entity count (off by default)")
    sub.add_argument("--se-adjacent", action="store_true",
                     help="add adjacent-sentence similarity mean/max to the SE set")
    sub.add_argument("--normalize-per-1000", action="store_true",
                     help="report discourse and spelling counts per 1000 word tokens")
    sub.add_argument("--plain-tf", action="store_true",
                     help="plain term-frequency reference cosine instead of TF-IDF")
    sub.add_argument("--compat-reference", action="store_true",
                     help="build the reference over the full dataset (label-leaking source behavior)")


def _add_classifier_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=int(_env("SOPEVAL_SEED") or 0),
                     help="seed for folds/splits")
    sub.add_argument("--classifier-seed", type=int, default=None,
                     help="classifier-internal seed (default: --seed)")
    group = sub.add_argument_group("classifier hyperparameters")
    group.add_argument("--C", type=float, default=None, help="svm box constraint")
    group.add_argument("--kernel", choices=("rbf", "linear"), default=None, help="svm kernel")
    group.add_argument("--gamma", type=float, default=None, help="rbf gamma (default 1/d)")
    group.add_argument("--tol", type=float, default=None, help="svm/lr convergence tolerance")
    group.add_argument("--max-passes", type=int, default=None, help="svm optimization pass cap")
    group.add_argument("--l2", type=float, default=None, help="lr regularization strength")
    group.add_argument("--learning-rate", type=float, default=None, help="lr/net step size")
    group.add_argument("--max-iters", type=int, default=None, help="lr iteration cap")
    group.add_argument("--trees", type=int, default=None, help="forest size")
    group.add_argument("--max-depth", type=int, default=None, help="tree depth cap")
    group.add_argument("--features-per-split", type=int, default=None,
                       help="features sampled per tree node (default sqrt(d))")
    group.add_argument("--hidden", default=None, help="comma-separated hidden layer sizes")
    group.add_argument("--activation", choices=("tanh", "sigmoid", "relu"), default=None)
    group.add_argument("--epochs", type=int, default=None, help="net training epochs")
    group.add_argument("--patience", type=int, default=None, help="ffnn early-stopping patience")
    group.add_argument("--tune-fraction", type=float, default=None,
                       help="fraction of training data held out for ffnn tuning")


def _parse_sets(parser: argparse.ArgumentParser, raw: str) -> tuple:
    sets = tuple(s.strip().upper() for s in raw.split(",") if s.strip())
    if not sets:
        parser.error("--sets must name at least one of T, WE, SE")
    return sets


def _spec_params(args, kind: str) -> dict:
    if kind == "svm":
        named = {"C": args.C, "kernel": args.kernel, "gamma": args.gamma,
                 "tol": args.tol, "max_passes": args.max_passes}
    elif kind == "lr":
        named = {"l2": args.l2, "learning_rate": args.learning_rate,
                 "max_iters": args.max_iters, "tol": args.tol}
    elif kind == "rfdt":
        named = {"n_trees": args.trees, "max_depth": args.max_depth,
                 "features_per_split": args.features_per_split}
    else:
        named = {"activation": args.activation, "learning_rate": args.learning_rate,
                 "epochs": args.epochs}
        if args.hidden is not None:
            named["hidden_sizes"] = tuple(int(h) for h in args.hidden.split(",") if h.strip())
        if kind == "ffnn":
            named["patience"] = args.patience
            named["tune_fraction"] = args.tune_fraction
    return {k: v for k, v in named.items() if v is not None}


def _build_spec(args, kind: str) -> ClassifierSpec:
    classifier_seed = args.classifier_seed if args.classifier_seed is not None else args.seed
    return ClassifierSpec(kind=kind, params=_spec_params(args, kind), seed=classifier_seed)


def _load_pipeline(parser, args, sets) -> tuple:
    """(config, resources) from flags; loads only what the enabled sets need."""
    _require_file(parser, args.resources, "--resources")
    lexical = load_lexical_resources(args.resources)
    we_table = None
    if "WE" in sets or "SE" in sets:
        path = _require(parser, args.embeddings, "--embeddings")
        _require_file(parser, path, "--embeddings")
        we_table = load_embeddings(path)
    sim_table = None
    if args.glove:
        _require_file(parser, args.glove, "--glove")
        sim_table = load_embeddings(args.glove)
    config = FeatureConfig(
        enabled_sets=sets,
        embedding_dimension=we_table.dimension if we_table is not None and "WE" in sets else None,
        include_ne_count=args.ne_count,
        se_adjacent_similarity=args.se_adjacent,
        normalize_per_1000=args.normalize_per_1000,
        reference_tfidf=not args.plain_tf,
        resource_dir=args.resources,
        embeddings_path=args.embeddings,
        glove_path=args.glove,
    )
    return config, PipelineResources(lexical=lexical, we_table=we_table, sim_table=sim_table)


def _load_serving_state(parser, args) -> tuple:
    model_path = _require(parser, args.model, "--model")
    _require_file(parser, model_path, "--model")
    trained = load_model(model_path)
    config = trained.config
    resource_dir = args.resources or config.resource_dir
    embeddings_path = args.embeddings or config.embeddings_path
    glove_path = args.glove or config.glove_path
    _require_file(parser, resource_dir, "--resources")
    lexical = load_lexical_resources(resource_dir)
    we_table = None
    if "WE" in config.enabled_sets or "SE" in config.enabled_sets:
        embeddings_path = _require(parser, embeddings_path, "--embeddings")
        _require_file(parser, embeddings_path, "--embeddings")
        we_table = load_embeddings(embeddings_path, expected_dimension=config.embedding_dimension)
    sim_table = None
    if glove_path:
        _require_file(parser, glove_path, "--glove")
        sim_table = load_embeddings(glove_path)
    resources = PipelineResources(lexical=lexical, we_table=we_table, sim_table=sim_table)
    return trained, resources


def _write_report(out_dir: Path, report, config) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.txt").write_text(render_metrics_text(report), encoding="utf-8")
    (out_dir / "report.tsv").write_text(render_metrics_delimited(report), encoding="utf-8")
    save_config(config, out_dir / "config.json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sopeval",
        description="Essay-quality classification: features, classifiers, ablation, serving.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("synth", help="generate a synthetic corpus and embeddings")
    p.add_argument("--out-dir", default=_env("SOPEVAL_OUT_DIR"), help="output directory")
    p.add_argument("--docs", type=int, default=int(_env("SOPEVAL_DOCS") or 50))
    p.add_argument("--seed", type=int, default=int(_env("SOPEVAL_SEED") or 0))
    p.add_argument("--dim", type=int, default=int(_env("SOPEVAL_DIM") or 50))

    p = subs.add_parser("extract", help="write a feature matrix for a corpus")
    p.add_argument("--corpus", default=_env("SOPEVAL_CORPUS"))
    p.add_argument("--out", default=_env("SOPEVAL_OUT"), help="output matrix path (TSV)")
    p.add_argument("--allow-unlabeled", action="store_true")
    p.add_argument("--reference", default=_env("SOPEVAL_REFERENCE"),
                   help="labeled corpus for the SE reference when --corpus is unlabeled")
    _add_resource_flags(p)
    _add_feature_flags(p)

    for name, help_text in (
        ("train", "fit a model on a labeled corpus and save it"),
        ("cv", "stratified k-fold cross validation"),
        ("ablate", "7x4 feature-set ablation grid"),
    ):
        p = subs.add_parser(name, help=help_text)
        p.add_argument("--corpus", default=_env("SOPEVAL_CORPUS"))
        p.add_argument("--model", choices=_KIND_CHOICES,
                       default=_env("SOPEVAL_MODEL_KIND") or ("svm" if name == "ablate" else None),
                       help="classifier kind")
        if name == "train":
            p.add_argument("--out", default=_env("SOPEVAL_OUT"), help="model file path")
        else:
            p.add_argument("--out", default=_env("SOPEVAL_OUT"), help="report directory")
        if name == "cv":
            p.add_argument("--k", type=int, default=int(_env("SOPEVAL_K") or 10))
            p.add_argument("--aggregate", choices=("pooled", "fold_mean"), default="pooled")
        _add_resource_flags(p)
        _add_feature_flags(p)
        _add_classifier_flags(p)

    p = subs.add_parser("predict", help="evaluate one essay file with a saved model")
    p.add_argument("--model", default=_env("MODEL_PATH", "SOPEVAL_MODEL"), help="model file")
    p.add_argument("--essay", default=_env("SOPEVAL_ESSAY"), help="essay text file")
    p.add_argument("--format", choices=("json", "text"), default="json")
    _add_resource_flags(p)

    p = subs.add_parser("serve", help="serve /v1/evaluate and /v1/health over HTTP")
    p.add_argument("--model", default=_env("MODEL_PATH", "SOPEVAL_MODEL"), help="model file")
    p.add_argument("--host", default=_env("SOPEVAL_HOST") or "127.0.0.1")
    p.add_argument("--port", type=int, default=int(_env("PORT", "SOPEVAL_PORT") or 8000))
    p.add_argument("--verbose", action="store_true")
    _add_resource_flags(p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(parser, args)
    except SopevalError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1


def _dispatch(parser: argparse.ArgumentParser, args) -> int:
    if args.command == "synth":
        out_dir = Path(_require(parser, args.out_dir, "--out-dir"))
        corpus_path, emb_path = synthetic.write_bundle(
            out_dir, n_docs=args.docs, seed=args.seed, dimension=args.dim
        )
        print(f"wrote {corpus_path} and {emb_path}")
        return 0

    if args.command == "extract":
        corpus_path = _require(parser, args.corpus, "--corpus")
        _require_file(parser, corpus_path, "--corpus")
        out_path = Path(_require(parser, args.out, "--out"))
        sets = _parse_sets(parser, args.sets)
        config, resources = _load_pipeline(parser, args, sets)
        corpus = load_corpus(corpus_path, require_labels=not args.allow_unlabeled)
        featurizer = Featurizer(config, resources)
        labeled = all(d.label is not None for d in corpus)
        if "SE" in sets and not labeled:
            ref_path = _require(parser, args.reference, "--reference")
            _require_file(parser, ref_path, "--reference")
            reference = build_reference(load_corpus(ref_path))
            ids, matrix = evaluation_matrix(corpus, featurizer, reference)
        elif labeled:
            ids, matrix, _ = training_matrix(corpus, featurizer)
        else:
            ids, matrix = evaluation_matrix(corpus, featurizer, None)
        export_matrix(out_path, ids, matrix, featurizer.names)
        save_config(config, out_path.with_suffix(out_path.suffix + ".config.json"))
        print(f"wrote {len(ids)} rows x {len(featurizer.names)} features to {out_path}")
        return 0

    if args.command in ("train", "cv", "ablate"):
        corpus_path = _require(parser, args.corpus, "--corpus")
        _require_file(parser, corpus_path, "--corpus")
        kind = _require(parser, args.model, "--model")
        out = Path(_require(parser, args.out, "--out"))
        sets = _parse_sets(parser, args.sets)
        config, resources = _load_pipeline(parser, args, sets)
        corpus = load_corpus(corpus_path)
        spec = _build_spec(args, kind)

        if args.command == "train":
            trained = train_model(corpus, config, spec, resources,
                                  compat_reference=args.compat_reference)
            save_model(trained, out)
            print(f"trained {kind} on {len(corpus)} documents -> {out} (model {trained.model_id})")
            return 0

        if args.command == "cv":
            report = cross_validate(corpus, config, spec, args.k, args.seed, resources,
                                    aggregate=args.aggregate,
                                    compat_reference=args.compat_reference)
            _write_report(out, report, config)
            print(render_metrics_text(report), end="")
            return 0

        grid = ablate(corpus, config, spec, args.seed, resources,
                      compat_reference=args.compat_reference)
        out.mkdir(parents=True, exist_ok=True)
        (out / "grid.txt").write_text(render_grid_text(grid), encoding="utf-8")
        (out / "grid.tsv").write_text(render_grid_delimited(grid), encoding="utf-8")
        save_config(config, out / "config.json")
        print(render_grid_text(grid), end="")
        return 0

    if args.command == "predict":
        essay_path = _require(parser, args.essay, "--essay")
        _require_file(parser, essay_path, "--essay")
        trained, resources = _load_serving_state(parser, args)
        text = Path(essay_path).read_text(encoding="utf-8")
        response = evaluate_essay(text, trained, resources)
        if args.format == "json":
            print(json.dumps(response.to_dict(), indent=2))
        else:
            print(f"label: {response.label}")
            print(f"decision value: {response.decision_value:+.6f}")
            print(f"model: {response.model_id}")
            for warning in response.warnings:
                print(f"warning: {warning}")
            print(f"{'feature':<28}{'raw':>14}{'standardized':>14}")
            for name, raw, std in response.feature_breakdown:
                print(f"{name:<28}{raw:>14.4f}{std:>14.4f}")
        return 0

    if args.command == "serve":
        trained, resources = _load_serving_state(parser, args)
        serve(ServiceState.ready(trained, resources, verbose=args.verbose), args.host, args.port)
        return 0

    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
