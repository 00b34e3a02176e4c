"""Within-class outlier scores, local outlier factors and the misclassification F1."""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

# Stand-in for an infinite raw score (no same-class proximity mass).
SENTINEL = 1e100


def _dense(P) -> np.ndarray:
    return P.toarray() if hasattr(P, "toarray") else np.asarray(P, dtype=float)


def raw_outlier_scores(P, labels, literal: bool = False) -> np.ndarray:
    """Raw within-class outlier scores from symmetric proximities.

    The default is ``N / sum_j P(i, j)^2`` over same-class ``j != i``, with
    ``N`` the dataset size. ``literal=True`` evaluates ``sum_j N / P(i, j)^2``
    instead, skipping zero-proximity terms. Infinite scores are clamped to
    :data:`SENTINEL`; indices alone in their class get NaN.
    """
    P = _dense(P)
    labels = np.asarray(labels)
    n = P.shape[0]
    out = np.empty(n)
    for i in range(n):
        same = labels == labels[i]
        same[i] = False
        if not same.any():
            out[i] = np.nan
            continue
        p = P[i, same]
        if literal:
            p = p[p > 0]
            out[i] = np.sum(n / p ** 2) if p.size else np.inf
        else:
            s = np.sum(p ** 2)
            out[i] = n / s if s > 0 else np.inf
    clamp = ~np.isfinite(out) & ~np.isnan(out)
    out[clamp | (out > SENTINEL)] = SENTINEL
    return out


def normalize_outlier_scores(raw, labels) -> np.ndarray:
    """``(raw - class median) / class mean absolute deviation about the median``.

    A class with zero deviation is set to 0 (with a warning); classes with
    fewer than two defined scores stay NaN.
    """
    raw = np.asarray(raw, dtype=float)
    labels = np.asarray(labels)
    out = np.full(raw.shape, np.nan)
    for c in np.unique(labels):
        idx = np.flatnonzero((labels == c) & ~np.isnan(raw))
        if idx.size < 2:
            continue
        med = np.median(raw[idx])
        mad = np.mean(np.abs(raw[idx] - med))
        if mad == 0:
            warnings.warn(f"class {c}: zero deviation in raw outlier scores")
            out[idx] = 0.0
        else:
            out[idx] = (raw[idx] - med) / mad
    return out


def top_outlier(scores) -> int:
    """Index of the largest defined score (lowest index on ties)."""
    scores = np.asarray(scores, dtype=float)
    if np.all(np.isnan(scores)):
        raise ValueError("no defined outlier scores")
    return int(np.nanargmax(scores))


@dataclass
class LOFResult:
    values: np.ndarray
    outlier: np.ndarray
    threshold: float

    @property
    def decision(self) -> np.ndarray:
        """Negative for outliers, as in the usual LOF decision function."""
        return self.threshold - self.values


def _ratio(num, den):
    if math.isinf(num) and math.isinf(den):
        return 1.0
    if math.isinf(den):
        return 0.0
    return num / den


def lof(d, k: int = 5, threshold: float = 1.5) -> LOFResult:
    """Local outlier factors from a precomputed dissimilarity matrix.

    The k-distance neighbourhood includes every point tied with the k-th
    nearest neighbour. Groups of more than ``k`` identical points have
    infinite local density; ratios ``inf / inf`` count as 1.
    """
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    if n < k + 1:
        raise ValueError(f"LOF with k={k} needs at least {k + 1} points")
    off = d.copy()
    np.fill_diagonal(off, np.inf)
    kdist = np.partition(off, k - 1, axis=1)[:, k - 1]
    neighbours = [np.flatnonzero(off[i] <= kdist[i]) for i in range(n)]
    lrd = np.empty(n)
    for i, nb in enumerate(neighbours):
        mean_reach = math.fsum(np.maximum(kdist[nb], d[i, nb]).tolist()) / nb.size
        lrd[i] = 1.0 / mean_reach if mean_reach > 0 else np.inf
    values = np.empty(n)
    for i, nb in enumerate(neighbours):
        vals = lrd[nb]
        mean_lrd = np.inf if np.isinf(vals).any() else math.fsum(vals.tolist()) / nb.size
        values[i] = _ratio(mean_lrd, lrd[i])
    return LOFResult(values, values > threshold, threshold)


def one_nn_predict(d, labels) -> np.ndarray:
    """Leave-one-out 1-nearest-neighbour labels (ties to the lowest index)."""
    d = np.array(d, dtype=float)
    if d.shape[0] < 2:
        raise ValueError("1-NN needs at least 2 points")
    np.fill_diagonal(d, np.inf)
    return np.asarray(labels)[np.argmin(d, axis=1)]


def misclassified_outlier_f1(predicted, true_labels, outlier) -> dict:
    """F1 for "correct and inlier" as the positive case.

    TP: correct inlier, TN: misclassified outlier, FP: misclassified inlier,
    FN: correct outlier. F1 is 0 when there is no positive evidence at all.
    """
    predicted = np.asarray(predicted)
    true_labels = np.asarray(true_labels)
    outlier = np.asarray(outlier, dtype=bool)
    if not predicted.shape == true_labels.shape == outlier.shape:
        raise ValueError("predicted, true_labels and outlier must have equal length")
    correct = predicted == true_labels
    tp = int(np.sum(correct & ~outlier))
    tn = int(np.sum(~correct & outlier))
    fp = int(np.sum(~correct & ~outlier))
    fn = int(np.sum(correct & outlier))
    denom = 2 * tp + fp + fn
    return {"f1": 2 * tp / denom if denom else 0.0, "TP": tp, "FP": fp, "FN": fn, "TN": tn}


@dataclass
class OutlierReport:
    """Per-index outlier detail plus the F1 summary.

    ``predicted_class`` may hold ``-1`` for indices without a prediction;
    those are left out of the F1 counts.
    """

    raw_score: np.ndarray
    normalized_score: np.ndarray
    lof_value: np.ndarray
    lof_outlier: np.ndarray
    predicted_class: np.ndarray
    true_class: np.ndarray
    lof_threshold: float
    summary: dict

    @classmethod
    def build(cls, raw, normalized, lof_result: LOFResult, predicted, true_labels):
        predicted = np.asarray(predicted)
        true_labels = np.asarray(true_labels)
        keep = predicted >= 0
        summary = misclassified_outlier_f1(predicted[keep], true_labels[keep],
                                           lof_result.outlier[keep])
        summary["n_scored"] = int(keep.sum())
        return cls(np.asarray(raw, float), np.asarray(normalized, float),
                   lof_result.values, lof_result.outlier, predicted, true_labels,
                   lof_result.threshold, summary)

    @property
    def lof_label(self):
        return np.where(self.lof_outlier, "outlier", "inlier")

    def to_dict(self) -> dict:
        def num(v):
            v = float(v)
            return None if math.isnan(v) else v

        rows = [{"id": i, "raw_score": num(self.raw_score[i]),
                 "normalized_score": num(self.normalized_score[i]),
                 "lof_value": num(self.lof_value[i]),
                 "lof_label": str(self.lof_label[i]),
                 "predicted_class": int(self.predicted_class[i]),
                 "true_class": int(self.true_class[i])} for i in range(len(self.raw_score))]
        return {"lof_threshold": self.lof_threshold, "summary": self.summary, "points": rows}

    @classmethod
    def from_dict(cls, d: dict) -> "OutlierReport":
        pts = d["points"]

        def col(name):
            return np.array([np.nan if p[name] is None else p[name] for p in pts], dtype=float)

        return cls(col("raw_score"), col("normalized_score"), col("lof_value"),
                   np.array([p["lof_label"] == "outlier" for p in pts]),
                   np.array([p["predicted_class"] for p in pts]),
                   np.array([p["true_class"] for p in pts]),
                   d["lof_threshold"], d["summary"])

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def from_json(cls, path) -> "OutlierReport":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def summary_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            keys = ["f1", "TP", "FP", "FN", "TN", "n_scored"]
            w.writerow(["lof_threshold"] + keys)
            w.writerow([repr(float(self.lof_threshold))] + [self.summary[k] for k in keys])

    def __eq__(self, other):
        if not isinstance(other, OutlierReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()

