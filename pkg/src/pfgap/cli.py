"""Command-line interface.

Subcommands: ``train``, ``prox``, ``embed``, ``outliers``, ``eval`` and
``synth``. Exit status is 0 on success, 1 for invalid input (arguments,
files, configuration) and 2 when a computation fails.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .dataio import (
    ValidationError,
    load_dataset,
    read_matrix_csv,
    save_tsv,
    synth_dataset,
    write_dense_csv,
    write_embedding_csv,
    write_sparse_csv,
)
from .distances import KINDS

logger = logging.getLogger("pfgap")

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def parse_measures(text: str) -> tuple:
    if text.strip().lower() == "all":
        return KINDS
    kinds = tuple(k.strip().upper() for k in text.split(",") if k.strip())
    bad = [k for k in kinds if k not in KINDS]
    if bad or not kinds:
        raise ValidationError(f"unknown measures {bad or text!r}; choose from {', '.join(KINDS)}")
    return kinds


def _model_dir(path):
    return os.path.dirname(os.path.abspath(path))


def _load_model(path):
    from .forest import ProximityForest

    if not os.path.exists(path):
        raise ValidationError(f"{path}: no such model file")
    try:
        return ProximityForest.load(path)
    except (ValueError, KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: not a valid model ({exc})") from None


def _add_forest_flags(p):
    p.add_argument("--trees", type=int, default=100, help="number of trees")
    p.add_argument("--r", type=int, default=5, help="candidate splits per node")
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--measures", default="all", help="comma list of distance measures or 'all'")
    p.add_argument("--selection-scope", choices=("per-split", "per-tree"), default="per-split")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-jobs", type=int, default=1)
    p.add_argument("--znorm", action="store_true", help="z-normalize every series first")


def cmd_train(args):
    from .forest import ForestConfig, ProximityForest

    ds = load_dataset(args.data, znorm=args.znorm)
    try:
        cfg = ForestConfig(args.trees, args.r, args.max_depth, parse_measures(args.measures),
                           args.selection_scope, True, args.seed, args.n_jobs)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    if ds.n_classes < 2:
        raise ValidationError(f"{args.data}: training needs at least 2 classes")
    pf = ProximityForest.from_config(cfg).fit(ds)
    os.makedirs(args.out, exist_ok=True)
    model = os.path.join(args.out, "model.json")
    pf.save(model)
    with open(os.path.join(args.out, "config.json"), "w") as fh:
        json.dump({"data": os.path.abspath(args.data), "znorm": args.znorm,
                   "forest": pf.to_dict()["config"]}, fh, indent=1, sort_keys=True)
    print(f"model: {model}")
    print(f"oob_accuracy: {pf.oob_accuracy()!r}")
    return EXIT_OK


def cmd_prox(args):
    from .proximity import gap_dissimilarity, gap_proximities, original_proximities, symmetrize

    pf = _load_model(args.model)
    p = gap_proximities(pf) if args.kind == "gap" else original_proximities(pf)
    if args.symmetric:
        p = symmetrize(p)
    suffix = "_symmetric" if args.symmetric else ""
    out = args.out or os.path.join(_model_dir(args.model),
                                   f"proximity_{args.kind}{suffix}_{args.format}.csv")
    (write_dense_csv if args.format == "dense" else write_sparse_csv)(p.matrix, out)
    print(f"proximities: {out}")
    if p.undefined_rows.size:
        print(f"undefined_rows: {p.undefined_rows.tolist()}")
    if args.dissim:
        P = p if p.symmetrized else symmetrize(p)
        write_dense_csv(gap_dissimilarity(P, args.exponent), args.dissim)
        print(f"dissimilarity: {args.dissim}")
    return EXIT_OK


def cmd_embed(args):
    from .embedding import mds_metric, mds_nonmetric

    d = read_matrix_csv(args.dissim)
    labels, highlight, ids = None, None, None
    if args.model:
        from .outlier import normalize_outlier_scores, raw_outlier_scores, top_outlier
        from .proximity import gap_proximities, symmetrize

        pf = _load_model(args.model)
        if pf.labels_.shape[0] != d.shape[0]:
            raise ValidationError("model and dissimilarity matrix sizes differ")
        names = pf.label_names_ or [str(c) for c in range(pf.n_classes_)]
        labels = [names[c] for c in pf.labels_]
        P = symmetrize(gap_proximities(pf))
        scores = normalize_outlier_scores(raw_outlier_scores(P, pf.labels_), pf.labels_)
        if not np.all(np.isnan(scores)):
            highlight = top_outlier(scores)
        if P.undefined_rows.size:
            # never-OOB rows are left out of the embedding
            ids = np.flatnonzero(P.defined)
            print(f"excluded_never_oob: {P.undefined_rows.tolist()}")
            d = d[np.ix_(ids, ids)]
            labels = [labels[i] for i in ids]
            highlight = None if highlight is None or not P.defined[highlight] else \
                int(np.searchsorted(ids, highlight))
    elif args.data:
        ds = load_dataset(args.data)
        if len(ds) != d.shape[0]:
            raise ValidationError("dataset and dissimilarity matrix sizes differ")
        labels = [ds.label_names[c] for c in ds.labels]
    try:
        fn = mds_metric if args.mds == "metric" else mds_nonmetric
        E = fn(d, dim=args.dim, max_iter=args.max_iter, seed=args.seed)
    except ValueError as exc:
        raise ValidationError(f"{args.dissim}: {exc}") from None
    stem = os.path.splitext(args.out or args.dissim)[0]
    if not args.out:
        stem = f"{stem}_{args.mds}"
    out = stem + ".csv" if not args.out else args.out
    write_embedding_csv(E.coordinates, out, labels, ids)
    print(f"embedding: {out}")
    print(f"stress: {E.stress!r}")
    if args.svg:
        from .plotting import scatter_svg

        svg = stem + ".svg"
        scatter_svg(E.coordinates, svg, labels, highlight, title=f"{args.mds} MDS")
        print(f"svg: {svg}")
    return EXIT_OK


def cmd_outliers(args):
    from .outlier import (OutlierReport, lof, normalize_outlier_scores,
                          raw_outlier_scores, top_outlier)
    from .proximity import gap_dissimilarity, gap_proximities, symmetrize

    if args.lof_k < 1 or args.lof_threshold <= 0:
        raise ValidationError("--lof-k must be >= 1 and --lof-threshold > 0")
    pf = _load_model(args.model)
    if pf.labels_.shape[0] < args.lof_k + 1:
        raise ValidationError(f"LOF with k={args.lof_k} needs at least {args.lof_k + 1} series")
    P = symmetrize(gap_proximities(pf))
    raw = raw_outlier_scores(P, pf.labels_, literal=args.literal)
    norm = normalize_outlier_scores(raw, pf.labels_)
    D = gap_dissimilarity(P, args.exponent)
    report = OutlierReport.build(raw, norm, lof(D, args.lof_k, args.lof_threshold),
                                 pf.oob_predict(), pf.labels_)
    out = args.out or _model_dir(args.model)
    os.makedirs(out, exist_ok=True)
    report.to_json(os.path.join(out, "outliers.json"))
    report.summary_csv(os.path.join(out, "outliers_summary.csv"))
    s = report.summary
    print(f"report: {os.path.join(out, 'outliers.json')}")
    print(f"f1: {s['f1']!r} TP={s['TP']} FP={s['FP']} FN={s['FN']} TN={s['TN']}")
    if not np.all(np.isnan(norm)):
        print(f"top_outlier: {top_outlier(norm)}")
    return EXIT_OK


def cmd_eval(args):
    from .pipeline import RunConfig, run_pipeline

    base = RunConfig.from_json(args.config).to_dict() if args.config else {}
    # flags left unset fall back to the config file, then to RunConfig defaults
    flags = {"n_trees": args.trees, "r": args.r, "max_depth": args.max_depth,
             "selection_scope": args.selection_scope, "seed": args.seed,
             "n_jobs": args.n_jobs, "znorm": args.znorm, "exponent": args.exponent,
             "lof_k": args.lof_k, "lof_threshold": args.lof_threshold}
    flags = {k: v for k, v in flags.items() if v is not None}
    if args.forest_measures is not None:
        flags["measures"] = parse_measures(args.forest_measures)
    if args.measures is not None:
        flags["baselines"] = parse_measures(args.measures)
    if args.lof_sweep:
        try:
            flags["lof_thresholds"] = [float(t) for t in args.lof_sweep.split(",")]
        except ValueError:
            raise ValidationError(f"--lof-sweep: not a comma list of numbers: {args.lof_sweep!r}")
    cfg = RunConfig.from_dict({**base, **flags})
    datasets = [load_dataset(p) for p in args.data]
    runs = run_pipeline(cfg, datasets, args.out)
    print(f"tables: {os.path.join(args.out, 'kmeans_table.csv')}, "
          f"{os.path.join(args.out, 'f1_table.csv')}")
    for name, run in runs.items():
        dg = run["results"]["DGAP"]
        print(f"{name}: DGAP kmeans={dg['kmeans']['max']!r}({dg['kmeans']['mode']}) "
              f"f1={max(dg['f1_sweep'].values())!r}")
    return EXIT_OK


def cmd_synth(args):
    ds = synth_dataset(args.classes, args.per_class, args.length, args.noise, args.seed)
    if args.out:
        save_tsv(ds, args.out)
        print(f"dataset: {args.out}")
    else:
        for s, c in zip(ds.series, ds.labels):
            sys.stdout.write("\t".join([ds.label_names[c]] + [repr(float(v)) for v in s]) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pfgap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="fit a proximity forest")
    p.add_argument("--data", required=True, help="UCR-style TSV (or header-less CSV)")
    _add_forest_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("prox", help="export proximities of a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--format", choices=("dense", "sparse"), default="sparse")
    p.add_argument("--kind", choices=("gap", "original"), default="gap")
    p.add_argument("--symmetric", action="store_true", help="symmetrize before writing")
    p.add_argument("--out", help="output CSV (default: next to the model)")
    p.add_argument("--dissim", help="also write the (1 - P)^exponent dissimilarity here")
    p.add_argument("--exponent", type=int, choices=(1, 2), default=2)
    p.set_defaults(func=cmd_prox)

    p = sub.add_parser("embed", help="MDS embedding of a dissimilarity matrix")
    p.add_argument("--dissim", required=True, help="dense or sparse matrix CSV")
    p.add_argument("--mds", choices=("metric", "nonmetric"), default="metric")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--svg", action="store_true", help="also write an SVG scatter plot")
    p.add_argument("--model", help="model for labels and the top outlier highlight")
    p.add_argument("--data", help="dataset for labels (when no model is given)")
    p.add_argument("--out", help="embedding CSV path")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("outliers", help="outlier scores, LOF and F1 for a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--lof-k", type=int, default=5)
    p.add_argument("--lof-threshold", type=float, default=1.5)
    p.add_argument("--exponent", type=int, choices=(1, 2), default=2)
    p.add_argument("--literal", action="store_true", help="per-term raw score form")
    p.add_argument("--out", help="output directory (default: next to the model)")
    p.set_defaults(func=cmd_outliers)

    p = sub.add_parser("eval", help="full pipeline and both evaluation tables")
    p.add_argument("--data", required=True, nargs="+", help="one or more datasets")
    p.add_argument("--measures", help="baseline measures (comma list or 'all', default all)")
    p.add_argument("--forest-measures", help="measures available to the forest (default all)")
    p.add_argument("--out", default="tables", help="output directory")
    p.add_argument("--config", help="RunConfig JSON; explicit flags override it")
    p.add_argument("--trees", type=int, help="default 100")
    p.add_argument("--r", type=int, help="default 5")
    p.add_argument("--max-depth", type=int)
    p.add_argument("--selection-scope", choices=("per-split", "per-tree"))
    p.add_argument("--seed", type=int, help="default 0")
    p.add_argument("--n-jobs", type=int)
    p.add_argument("--znorm", action="store_true", default=None)
    p.add_argument("--exponent", type=int, choices=(1, 2))
    p.add_argument("--lof-k", type=int, help="default 5")
    p.add_argument("--lof-threshold", type=float, help="default 1.5")
    p.add_argument("--lof-sweep", help="comma list of LOF thresholds; best F1 is tabulated")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--per-class", type=int, default=25)
    p.add_argument("--length", type=int, default=150)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", help="TSV path (default: stdout)")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"pfgap: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # any other failure is a runtime error
        print(f"pfgap: failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
