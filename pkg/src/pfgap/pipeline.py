"""End-to-end runs: forest, proximities, embeddings, outliers and the two tables.

Every run writes into a staging directory next to the requested output
directory and moves the files into place only after all stages succeed,
so a failed run leaves nothing behind.
"""
from __future__ import annotations

import csv
import json
import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields

import numpy as np

from .dataio import ValidationError, write_dense_csv, write_embedding_csv, write_sparse_csv
from .distances import KINDS, dataset_stats, default_measure, pairwise_distance_matrix
from .embedding import kmeans_cluster_score, mds_metric, mds_nonmetric
from .forest import ForestConfig, ProximityForest
from .outlier import (
    OutlierReport,
    lof,
    normalize_outlier_scores,
    one_nn_predict,
    raw_outlier_scores,
)
from .proximity import gap_dissimilarity, gap_proximities, symmetrize

logger = logging.getLogger(__name__)

DGAP = "DGAP"


class PipelineError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunConfig:
    """Resolved settings of one pipeline run.

    Forest fields mirror :class:`~pfgap.forest.ForestConfig`. ``baselines``
    lists the distance measures evaluated next to DGAP. When
    ``lof_thresholds`` is non-empty, the F1 table cell is the best F1 over
    that sweep; otherwise it uses ``lof_threshold``.
    """

    n_trees: int = 100
    r: int = 5
    max_depth: int | None = None
    measures: tuple = KINDS
    selection_scope: str = "per-split"
    seed: int = 0
    n_jobs: int = 1
    znorm: bool = False
    exponent: int = 2
    lof_k: int = 5
    lof_threshold: float = 1.5
    lof_thresholds: tuple = ()
    literal_scores: bool = False
    mds_dim: int = 2
    mds_max_iter: int = 300
    mds_tol: float = 1e-6
    kmeans_n_init: int = 10
    kmeans_max_iter: int = 300
    baselines: tuple = KINDS

    def __post_init__(self):
        self.measures = tuple(self.measures)
        self.baselines = tuple(self.baselines)
        self.lof_thresholds = tuple(float(t) for t in self.lof_thresholds)
        try:
            self.forest_config()
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        bad = [k for k in self.baselines if k not in KINDS]
        if bad:
            raise ValidationError(f"unknown baseline measures {bad}")
        if self.exponent not in (1, 2):
            raise ValidationError("exponent must be 1 or 2")
        if self.lof_k < 1:
            raise ValidationError("lof_k must be >= 1")
        if not all(t > 0 for t in (self.lof_threshold,) + self.lof_thresholds):
            raise ValidationError("LOF thresholds must be positive")
        if self.mds_dim < 1 or self.mds_max_iter < 0 or self.mds_tol < 0:
            raise ValidationError("invalid MDS options")
        if self.kmeans_n_init < 1 or self.kmeans_max_iter < 1:
            raise ValidationError("invalid k-means options")

    def forest_config(self) -> ForestConfig:
        return ForestConfig(self.n_trees, self.r, self.max_depth, self.measures,
                            self.selection_scope, True, self.seed, self.n_jobs)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("measures", "baselines", "lof_thresholds"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path) as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: {exc}") from None
        if not isinstance(d, dict):
            raise ValidationError(f"{path}: config must be a JSON object")
        return cls.from_dict(d)


@contextmanager
def _stage(name):
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, exc) from exc


@contextmanager
def staged_output(out_dir):
    """Yield a staging directory whose files land in ``out_dir`` on success."""
    out_dir = os.path.abspath(str(out_dir))
    parent = os.path.dirname(out_dir)
    os.makedirs(parent, exist_ok=True)
    tmp = tempfile.mkdtemp(prefix=".pfgap-", dir=parent)
    try:
        yield tmp
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    os.makedirs(out_dir, exist_ok=True)
    for root, _, files in os.walk(tmp):
        rel = os.path.relpath(root, tmp)
        dest = os.path.normpath(os.path.join(out_dir, rel))
        os.makedirs(dest, exist_ok=True)
        for f in files:
            os.replace(os.path.join(root, f), os.path.join(dest, f))
    shutil.rmtree(tmp, ignore_errors=True)


def _embed_and_score(d, labels, cfg: RunConfig, ids=None):
    """Both MDS embeddings and their k-means scores, restricted to ``ids``."""
    if ids is not None:
        d, labels = d[np.ix_(ids, ids)], labels[ids]
    kw = dict(dim=cfg.mds_dim, max_iter=cfg.mds_max_iter, tol=cfg.mds_tol, seed=cfg.seed)
    Em = mds_metric(d, **kw)
    En = mds_nonmetric(d, **kw)
    Em.ids = En.ids = ids
    km = dict(n_init=cfg.kmeans_n_init, max_iter=cfg.kmeans_max_iter, seed=cfg.seed)
    sm = kmeans_cluster_score(Em, labels, **km)
    sn = kmeans_cluster_score(En, labels, **km)
    return Em, En, {"metric": sm, "nonmetric": sn, "max": max(sm, sn),
                    "mode": "m" if sm >= sn else "n"}


def _f1_sweep(d, predicted, labels, cfg: RunConfig):
    thresholds = cfg.lof_thresholds or (cfg.lof_threshold,)
    out = {}
    for th in thresholds:
        res = lof(d, cfg.lof_k, th)
        out[th] = OutlierReport.build(np.full(len(labels), np.nan), np.full(len(labels), np.nan),
                                      res, predicted, labels).summary["f1"]
    best = max(thresholds, key=lambda t: (out[t], -thresholds.index(t)))
    return out, best


def _evaluate_measure(kind, dataset, stats, cfg: RunConfig):
    with _stage(f"distance:{kind}"):
        d = pairwise_distance_matrix(dataset, default_measure(kind, stats))
    with _stage(f"embed:{kind}"):
        Em, En, km = _embed_and_score(d, dataset.labels, cfg)
    with _stage(f"outliers:{kind}"):
        pred = one_nn_predict(d, dataset.labels)
        sweep, best = _f1_sweep(d, pred, dataset.labels, cfg)
        n = len(dataset)
        report = OutlierReport.build(np.full(n, np.nan), np.full(n, np.nan),
                                     lof(d, cfg.lof_k, best), pred, dataset.labels)
    return {"d": d, "metric": Em, "nonmetric": En, "kmeans": km, "f1_sweep": sweep,
            "report": report}


def _write_method(stage_dir, tag, res, labels):
    write_dense_csv(res["d"], os.path.join(stage_dir, f"dissimilarity_{tag}.csv"))
    for mode in ("metric", "nonmetric"):
        E = res[mode]
        ids = np.arange(len(labels)) if E.ids is None else E.ids
        write_embedding_csv(E.coordinates, os.path.join(stage_dir, f"embedding_{tag}_{mode}.csv"),
                            [labels[i] for i in ids], ids)
    res["report"].to_json(os.path.join(stage_dir, f"outliers_{tag}.json"))
    res["report"].summary_csv(os.path.join(stage_dir, f"outliers_{tag}_summary.csv"))


def run_dataset(cfg: RunConfig, dataset, stage_dir) -> dict:
    """All stages for one dataset, files written under ``stage_dir``."""
    os.makedirs(stage_dir, exist_ok=True)
    if cfg.znorm and not dataset.normalized:
        dataset = dataset.znormalized()
    if dataset.n_classes < 2:
        raise ValidationError(f"{dataset.name}: training pipelines need at least 2 classes")
    labels = dataset.labels
    names = [dataset.label_names[c] for c in labels]
    with _stage("fit"):
        forest = ProximityForest.from_config(cfg.forest_config()).fit(dataset)
        forest.save(os.path.join(stage_dir, "model.json"))
        with open(os.path.join(stage_dir, "coverage.json"), "w") as fh:
            json.dump(forest.coverage_report(), fh, indent=1)
    with _stage("proximities"):
        p = gap_proximities(forest)
        P = symmetrize(p)
        write_sparse_csv(p.matrix, os.path.join(stage_dir, "proximity_gap.csv"))
        write_sparse_csv(P.matrix, os.path.join(stage_dir, "proximity_gap_symmetric.csv"))
    with _stage("dissimilarity"):
        D = gap_dissimilarity(P, cfg.exponent)
    with _stage("embed:DGAP"):
        # never-OOB rows are left out of the embedding and listed in coverage.json
        defined = np.flatnonzero(P.defined)
        if defined.size < len(dataset):
            logger.warning("%s: %d never-OOB indices excluded from the DGAP embedding",
                           dataset.name, len(dataset) - defined.size)
        Em, En, km = _embed_and_score(D, labels, cfg, defined)
    with _stage("outliers:DGAP"):
        raw = raw_outlier_scores(P, labels, literal=cfg.literal_scores)
        norm = normalize_outlier_scores(raw, labels)
        pred = forest.oob_predict()
        sweep, best = _f1_sweep(D, pred, labels, cfg)
        report = OutlierReport.build(raw, norm, lof(D, cfg.lof_k, best), pred, labels)
    results = {DGAP: {"d": D, "metric": Em, "nonmetric": En, "kmeans": km,
                      "f1_sweep": sweep, "report": report}}
    stats = dataset_stats(dataset)
    kinds = cfg.baselines
    if "ED" in kinds and np.unique(dataset.lengths).size > 1:
        logger.warning("%s: unequal series lengths, skipping the ED baseline", dataset.name)
        kinds = tuple(k for k in kinds if k != "ED")
    if cfg.n_jobs == 1 or len(kinds) < 2:
        base = [_evaluate_measure(k, dataset, stats, cfg) for k in kinds]
    else:
        from joblib import Parallel, delayed
        base = Parallel(n_jobs=cfg.n_jobs)(
            delayed(_evaluate_measure)(k, dataset, stats, cfg) for k in kinds)
    results.update(zip(kinds, base))
    with _stage("write"):
        for tag, res in results.items():
            _write_method(stage_dir, tag, res, names)
        with open(os.path.join(stage_dir, "scores.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["method", "kmeans_metric", "kmeans_nonmetric", "kmeans_max", "mds_mode",
                        "lof_threshold", "f1"])
            for tag, res in results.items():
                km = res["kmeans"]
                for th, f1 in res["f1_sweep"].items():
                    w.writerow([tag, repr(km["metric"]), repr(km["nonmetric"]),
                                repr(km["max"]), km["mode"], repr(th), repr(f1)])
    return {"forest": forest, "results": results, "dataset": dataset}


def _cell_kmeans(res):
    if res is None:
        return "NA"
    km = res["kmeans"]
    return f"{km['max']!r}({km['mode']})"


def _cell_f1(res):
    return "NA" if res is None else repr(max(res["f1_sweep"].values()))


def write_tables(runs: dict, out_dir, methods) -> None:
    """k-means and F1 table CSVs: rows are methods, columns datasets.

    k-means cells read ``score(m)`` or ``score(n)`` for the metric or
    non-metric embedding that scored higher (metric on ties); skipped
    methods show ``NA``.
    """
    names = list(runs)
    t1 = os.path.join(out_dir, "kmeans_table.csv")
    t2 = os.path.join(out_dir, "f1_table.csv")
    with open(t1, "w", newline="") as f1, open(t2, "w", newline="") as f2:
        w1, w2 = csv.writer(f1), csv.writer(f2)
        w1.writerow(["method"] + names)
        w2.writerow(["method"] + names)
        for m in methods:
            cells = [runs[d]["results"].get(m) for d in names]
            w1.writerow([m] + [_cell_kmeans(c) for c in cells])
            w2.writerow([m] + [_cell_f1(c) for c in cells])


def read_table(path) -> dict:
    """Parse a table CSV into ``{method: {dataset: cell}}``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0][1:]
    return {r[0]: dict(zip(header, r[1:])) for r in rows[1:]}


def run_pipeline(config: RunConfig, datasets, out_dir) -> dict:
    """Run every stage on one or more datasets and write all outputs.

    Layout: ``out_dir/config.json``, the two table CSVs, and one
    subdirectory per dataset holding the model, proximity and
    dissimilarity matrices, embeddings, outlier reports and ``scores.csv``.
    Returns ``{dataset name: run result}``.
    """
    if not isinstance(datasets, (list, tuple)):
        datasets = [datasets]
    seen = set()
    for ds in datasets:
        if ds.name in seen:
            raise ValidationError(f"duplicate dataset name {ds.name!r}")
        seen.add(ds.name)
    runs = {}
    with staged_output(out_dir) as stage:
        with open(os.path.join(stage, "config.json"), "w") as fh:
            json.dump(config.to_dict(), fh, indent=1, sort_keys=True)
        for ds in datasets:
            logger.info("running %s (n=%d)", ds.name, len(ds))
            runs[ds.name] = run_dataset(config, ds, os.path.join(stage, ds.name))
        with _stage("tables"):
            write_tables(runs, stage, (DGAP,) + config.baselines)
    return runs
