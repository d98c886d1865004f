"""Command-line driver for the rumour analysis pipeline.

Subcommands cover the whole workflow: validate a corpus (`ingest`), export
feature matrices (`features`), run a reduction method (`select`), fit and
persist a model plus explorer artifacts (`train`), report held-out metrics
(`evaluate`), trace accuracy over rumour lifetime (`curves`), generate a
synthetic corpus (`synth`), and serve the explorer API (`serve`).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import service
from .bench import (BENCHMARKS, BenchError, ExperimentConfig, SplitSpec, SynthSpec,
                    benchmark_predict, generate_corpus_files, run_experiment,
                    time_curves, write_curves_csv, write_metrics_table)
from .corpus import (AnnotationError, CorpusError, Dataset, close_annotations,
                     load_corpus, save_corpus)
from .features import (FeatureCatalog, FeatureError, default_catalog,
                       extract_features, extract_timeseries, feature_matrix,
                       write_feature_csv, write_timeseries_csv)
from .learn import FAMILIES, LearnError, save_model
from .lingua import Lexicon, default_lexicon, load_lexicon_tsv
from .select import (SelectError, compute_metrics, default_grid, fit_model,
                     kfold_cv, reduce_features, tune, write_cv_report,
                     write_trace_csv)

_ERRORS = (CorpusError, AnnotationError, FeatureError, LearnError, SelectError,
           BenchError, service.ServiceError, OSError)


def _load_dataset(args) -> Dataset:
    dataset = close_annotations(load_corpus(args.corpus))
    for w in dataset.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return dataset


def _load_lexicon(args) -> Lexicon:
    return load_lexicon_tsv(args.lexicon) if args.lexicon else default_lexicon()


def _build_catalog(args) -> FeatureCatalog:
    catalog = default_catalog(log_scale_user_counts=not args.raw_user_counts)
    if args.extra_attr:
        catalog = catalog.with_tweet_attributes(args.extra_attr)
    return catalog


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_ingest(args) -> int:
    dataset = _load_dataset(args)
    header = (f"{'rumour':<12} {'topic':<18} {'tweets':>6} {'%support':>9} "
              f"{'%against':>9} {'users':>6} {'hours':>7}")
    print(header)
    print("-" * len(header))
    for row in dataset.summary_rows():
        print(f"{row['rumour_id']:<12} {row['topic']:<18} {row['tweets']:>6} "
              f"{row['pct_support']:>9.1f} {row['pct_against']:>9.1f} "
              f"{row['users']:>6} {row['duration_hours']:>7.1f}")
    t = dataset.summary_totals()
    print(f"total: {t['rumours']} rumours, {t['tweets']} tweets, "
          f"{t['pct_support']:.1f}% support, {t['pct_against']:.1f}% against, "
          f"{t['users']} users")
    if args.out:
        paths = save_corpus(dataset, _out_dir(args))
        print(f"wrote validated corpus to {paths.tweets.parent}")
    return 0


def cmd_features(args) -> int:
    dataset = _load_dataset(args)
    lexicon = _load_lexicon(args)
    catalog = _build_catalog(args)
    out = _out_dir(args)

    ids = [r.rumour_id for r in dataset.rumours]
    labels = {r.rumour_id: int(r.veracity) for r in dataset.rumours}
    vectors = [extract_features(r, dataset.users, dataset.followees, lexicon, catalog)
               for r in dataset.rumours]
    write_feature_csv(out / "features.csv", ids, [labels[i] for i in ids], vectors)

    series = [extract_timeseries(r, dataset.users, dataset.followees, lexicon, catalog)
              for r in dataset.rumours]
    write_timeseries_csv(out / "timeseries.csv", labels, series)
    print(f"wrote {len(ids)} x {catalog.size} feature matrix and "
          f"{len(ids) * 20} time-series rows to {out}")
    return 0


def cmd_select(args) -> int:
    dataset = _load_dataset(args)
    lexicon = _load_lexicon(args)
    catalog = _build_catalog(args)
    out = _out_dir(args)

    vectors = [extract_features(r, dataset.users, dataset.followees, lexicon, catalog)
               for r in dataset.rumours]
    X = feature_matrix(vectors)
    y = [int(r.veracity) for r in dataset.rumours]
    trace = reduce_features(args.method, args.family, None, X, y,
                            budget=args.budget, seed=args.seed, k=args.k_folds,
                            feature_names=catalog.names)
    write_trace_csv(trace, out / "trace.csv")
    # summarise bulky detail lists (method 1 enumerates thousands of triples)
    details = {k: (len(v) if isinstance(v, list) and len(v) > 64 else v)
               for k, v in trace.details.items()}
    doc = {"v": 1, "method": args.method, "family": args.family,
           "budget": args.budget, "k_folds": args.k_folds, "seed": args.seed,
           "selected": list(trace.feature_names), "details": details,
           "steps": [{"step": s.step, "chosen": s.chosen, "f1_mean": s.f1_mean,
                      "f1_std": s.f1_std} for s in trace.steps]}
    with open(out / "selection.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    chain = " -> ".join(trace.feature_names)
    print(f"method {args.method} selected {len(trace.feature_names)} features: {chain}")
    return 0


def cmd_train(args) -> int:
    dataset = _load_dataset(args)
    lexicon = _load_lexicon(args)
    catalog = _build_catalog(args)
    out = _out_dir(args)

    vectors = [extract_features(r, dataset.users, dataset.followees, lexicon, catalog)
               for r in dataset.rumours]
    X = feature_matrix(vectors)
    y = [int(r.veracity) for r in dataset.rumours]
    names = catalog.names

    trace = reduce_features(args.method, args.family, None, X, y,
                            budget=args.budget, seed=args.seed, k=args.k_folds,
                            feature_names=names)
    subset = trace.feature_names
    cols = [names.index(f) for f in subset]
    hp = tune(args.family, default_grid(args.family), X[:, cols], y,
              k=args.k_folds, seed=args.seed)
    cv = kfold_cv(args.family, hp, X[:, cols], y, k=args.k_folds, seed=args.seed)
    model = fit_model(args.family, X[:, cols], y, hp, seed=args.seed,
                      feature_names=subset, catalog_version=catalog.version)

    write_trace_csv(trace, out / "trace.csv")
    write_cv_report(cv, out / "cv_report.csv")
    save_model(model, out / "model.json")
    service.build_artifacts(dataset, lexicon, model, out, catalog)
    print(f"trained {args.family} on {len(subset)} features "
          f"(cv f1 {cv.mean_f1:.3f}); artifacts in {out}")
    return 0


def _benchmark_metrics(dataset: Dataset, exp, seed: int) -> dict:
    """Benchmark rows for the metrics table, scored on the held-out rumours."""
    rumours = {r.rumour_id: r for r in dataset.rumours}
    labels = dict(zip(exp.rumour_ids, exp.labels))
    y_true = [labels[rid] for rid in exp.test_ids]
    table = {}
    for name in BENCHMARKS:
        rng = random.Random(seed) if name == "random" else None
        preds = []
        for rid in exp.test_ids:
            sup, _neu, aga = rumours[rid].stance_counts()
            preds.append(benchmark_predict(name, sup, aga, rng=rng))
        table[name] = compute_metrics(y_true, preds, [float(p) for p in preds])
    return table


def cmd_evaluate(args) -> int:
    dataset = _load_dataset(args)
    lexicon = _load_lexicon(args)
    catalog = _build_catalog(args)
    out = _out_dir(args)

    config = ExperimentConfig(
        families=tuple(args.family) if args.family else ("logreg", "cart", "rf"),
        method=args.method, budget=args.budget, k=args.k_folds, seed=args.seed,
        split=SplitSpec(seed=args.seed))
    exp = run_experiment(dataset, lexicon, catalog, config)

    table = dict(exp.holdout)
    table.update(_benchmark_metrics(dataset, exp, args.seed))
    write_metrics_table(table, out / "metrics.csv")

    print(f"{'model':<14} {'acc':>6} {'prec':>6} {'rec':>6} {'f1':>6} "
          f"{'auc':>6} {'kappa':>6}")
    for name, m in table.items():
        auc = f"{m.auc:.3f}" if m.auc is not None else "   n/a"
        print(f"{name:<14} {m.accuracy:>6.3f} {m.precision:>6.3f} "
              f"{m.recall:>6.3f} {m.f1:>6.3f} {auc:>6} {m.kappa:>6.3f}")
    print(f"train/test split: {len(exp.train_ids)}/{len(exp.test_ids)} rumours; "
          f"metrics written to {out / 'metrics.csv'}")
    return 0


def cmd_curves(args) -> int:
    dataset = _load_dataset(args)
    lexicon = _load_lexicon(args)
    catalog = _build_catalog(args)
    out = _out_dir(args)

    config = ExperimentConfig(
        families=tuple(args.family) if args.family else ("logreg", "cart", "rf"),
        method=args.method, budget=args.budget, k=args.k_folds, seed=args.seed,
        split=SplitSpec(seed=args.seed))
    exp = run_experiment(dataset, lexicon, catalog, config)
    curves = time_curves(dataset, lexicon, exp, catalog, seed=args.seed,
                         retrain_per_interval=args.retrain_per_interval)
    write_curves_csv(curves, out / "curves.csv")
    final = ", ".join(f"{name} {c.accuracies[-1]:.3f}"
                      for name, c in sorted(curves.items()))
    print(f"accuracy at interval 20: {final}")
    print(f"curves written to {out / 'curves.csv'}")
    return 0


def cmd_synth(args) -> int:
    spec = SynthSpec(n_rumours=args.rumours, seed=args.seed)
    paths = generate_corpus_files(spec, args.out)
    print(f"wrote synthetic corpus ({args.rumours} rumours, seed {args.seed}) "
          f"to {paths.tweets.parent}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    app = service.create_app(args.artifacts)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rumourlens",
        description="rumour veracity analysis over stance-annotated tweet corpora")
    sub = parser.add_subparsers(dest="command", required=True)

    corpus_p = argparse.ArgumentParser(add_help=False)
    corpus_p.add_argument("--corpus", required=True, help="corpus directory")
    corpus_p.add_argument("--lexicon", help="lexicon TSV (default: built-in)")

    catalog_p = argparse.ArgumentParser(add_help=False)
    catalog_p.add_argument("--extra-attr", action="append", metavar="NAME",
                           help="extra precomputed tweet attribute (repeatable)")
    catalog_p.add_argument("--raw-user-counts", action="store_true",
                           help="disable log scaling of user count attributes")

    model_p = argparse.ArgumentParser(add_help=False)
    model_p.add_argument("--method", type=int, choices=(1, 2, 3, 4), default=2,
                         help="feature reduction method (default 2: greedy forward)")
    model_p.add_argument("--k-folds", type=int, default=10)
    model_p.add_argument("--seed", type=int, default=0)
    model_p.add_argument("--budget", type=int, default=8,
                         help="max features to select (default 8)")

    p = sub.add_parser("ingest", parents=[corpus_p],
                       help="validate a corpus and print its summary table")
    p.add_argument("--out", help="re-serialise the stance-closed corpus here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("features", parents=[corpus_p, catalog_p],
                       help="export feature matrix and per-interval time series")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("select", parents=[corpus_p, catalog_p, model_p],
                       help="run one feature reduction method")
    p.add_argument("--out", required=True)
    p.add_argument("--family", choices=FAMILIES, default="cart")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("train", parents=[corpus_p, catalog_p, model_p],
                       help="select, tune, fit; write model and explorer artifacts")
    p.add_argument("--out", required=True)
    p.add_argument("--family", choices=FAMILIES, default="cart")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[corpus_p, catalog_p, model_p],
                       help="train/test experiment with benchmark comparison")
    p.add_argument("--out", required=True)
    p.add_argument("--family", action="append", choices=FAMILIES,
                   help="classifier family (repeatable; default logreg,cart,rf)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("curves", parents=[corpus_p, catalog_p, model_p],
                       help="accuracy over 20 cumulative lifetime intervals")
    p.add_argument("--out", required=True)
    p.add_argument("--family", action="append", choices=FAMILIES)
    p.add_argument("--retrain-per-interval", action="store_true",
                   help="refit models on window-k training features")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("synth", help="generate a seeded synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rumours", type=int, default=72)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="serve explorer artifacts over HTTP")
    p.add_argument("--artifacts", required=True,
                   help="directory containing explorer.json (see `train`)")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
