"""Dataset ingestion, synthetic data and matrix/CSV file formats."""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import sparse

from .distances import as_series


class ValidationError(ValueError):
    """Raised for malformed user input (files, configs, arguments)."""


class TimeSeries(NamedTuple):
    values: np.ndarray
    label: int
    id: int


@dataclass
class TimeSeriesDataset:
    """Labeled collection of univariate series.

    ``labels`` are dense integers ``0 .. k-1``; ``label_names[c]`` is the
    original label string of class ``c``.
    """

    series: list
    labels: np.ndarray
    label_names: list = field(default_factory=list)
    name: str = "dataset"
    normalized: bool = False

    def __post_init__(self):
        self.series = [as_series(s) for s in self.series]
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.series) < 2:
            raise ValidationError("a dataset needs at least 2 series")
        if self.labels.shape != (len(self.series),):
            raise ValidationError("labels must have one entry per series")
        if not self.label_names:
            self.label_names = [str(c) for c in range(int(self.labels.max()) + 1)]

    def __len__(self):
        return len(self.series)

    def __getitem__(self, i) -> TimeSeries:
        return TimeSeries(self.series[i], int(self.labels[i]), i)

    @property
    def n_classes(self) -> int:
        return len(np.unique(self.labels))

    @property
    def lengths(self) -> np.ndarray:
        return np.array([len(s) for s in self.series])

    def znormalized(self) -> "TimeSeriesDataset":
        """Copy with every series scaled to zero mean and unit variance."""
        out = []
        for s in self.series:
            sd = s.std()
            out.append((s - s.mean()) / sd if sd > 0 else s - s.mean())
        return TimeSeriesDataset(out, self.labels.copy(), list(self.label_names),
                                 self.name, normalized=True)


def _encode_labels(raw):
    def key(s):
        try:
            return (0, float(s), s)
        except ValueError:
            return (1, 0.0, s)

    names = sorted(set(raw), key=key)
    index = {s: c for c, s in enumerate(names)}
    return np.array([index[s] for s in raw]), names


def _parse_rows(lines, delimiter, path):
    raw_labels, series = [], []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(delimiter) if delimiter else line.split()
        if len(parts) < 3:
            raise ValidationError(f"{path}:{lineno}: expected a label and at least "
                                  f"2 values, got {len(parts)} fields")
        try:
            values = np.array([float(v) for v in parts[1:]])
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: non-numeric value ({exc})") from None
        if not np.all(np.isfinite(values)):
            raise ValidationError(f"{path}:{lineno}: non-finite value")
        raw_labels.append(parts[0].strip())
        series.append(values)
    if not series:
        raise ValidationError(f"{path}: no rows")
    if len(series) < 2:
        raise ValidationError(f"{path}: need at least 2 rows, got 1")
    return raw_labels, series


def load_tsv(path, delimiter: str | None = "\t", name: str | None = None) -> TimeSeriesDataset:
    """Read a UCR-style file: one series per row, class label first.

    Rows may differ in length. ``delimiter=","`` reads header-less CSV;
    ``None`` splits on any whitespace.
    """
    with open(path) as fh:
        raw_labels, series = _parse_rows(fh, delimiter, path)
    labels, names = _encode_labels(raw_labels)
    if name is None:
        name = os.path.splitext(os.path.basename(str(path)))[0]
        for suffix in ("_TRAIN", "_TEST"):
            name = name.removesuffix(suffix)
    return TimeSeriesDataset(series, labels, names, name)


def load_dataset(path, znorm: bool = False) -> TimeSeriesDataset:
    """Load TSV or CSV by extension, optionally z-normalizing each series."""
    delimiter = "," if str(path).lower().endswith(".csv") else "\t"
    ds = load_tsv(path, delimiter)
    return ds.znormalized() if znorm else ds


def save_tsv(ds: TimeSeriesDataset, path, delimiter: str = "\t") -> None:
    """Write a dataset with ``repr`` float formatting (exact round trip)."""
    with open(path, "w") as fh:
        for s, c in zip(ds.series, ds.labels):
            fh.write(delimiter.join([ds.label_names[c]] + [repr(float(v)) for v in s]))
            fh.write("\n")


def synth_dataset(classes: int = 2, per_class: int = 25, length: int = 150,
                  noise: float = 0.1, seed: int = 0) -> TimeSeriesDataset:
    """Synthetic shape-per-class dataset.

    Class ``c`` uses a sine, square or sawtooth wave (cycling with ``c``)
    whose frequency grows every three classes, plus a random phase jitter
    and Gaussian noise of standard deviation ``noise``.
    """
    if classes < 2 or per_class < 2:
        raise ValidationError("synth_dataset needs classes >= 2 and per_class >= 2")
    if length < 3:
        raise ValidationError("length must be at least 3")
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, length, endpoint=False)
    series, labels = [], []
    for c in range(classes):
        freq = 1.0 + c // 3
        for _ in range(per_class):
            phase = rng.uniform(-0.05, 0.05) if noise > 0 else 0.0
            u = freq * t + phase
            shape = c % 3
            if shape == 0:
                base = np.sin(2 * np.pi * u)
            elif shape == 1:
                base = np.sign(np.sin(2 * np.pi * u))
            else:
                base = 2.0 * (u - np.floor(u + 0.5))
            series.append(base + noise * rng.normal(size=length))
            labels.append(c)
    return TimeSeriesDataset(series, np.array(labels), [str(c + 1) for c in range(classes)],
                             name=f"synth{classes}x{per_class}")


# -- matrix files -----------------------------------------------------------

def write_dense_csv(M, path) -> None:
    """Header-less dense CSV, full-precision ``repr`` formatting."""
    M = M.toarray() if sparse.issparse(M) else np.asarray(M)
    with open(path, "w") as fh:
        for row in M:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def write_sparse_csv(M, path) -> None:
    """Triplet CSV ``i,j,value`` for stored (nonzero) entries, row-major.

    The first line is a ``# n=<size>`` comment so trailing all-zero rows
    survive the round trip.
    """
    M = sparse.coo_matrix(M)
    order = np.lexsort((M.col, M.row))
    with open(path, "w") as fh:
        fh.write(f"# n={M.shape[0]}\n")
        for k in order:
            if M.data[k] != 0:
                fh.write(f"{M.row[k]},{M.col[k]},{float(M.data[k])!r}\n")


def read_matrix_csv(path) -> np.ndarray:
    """Read either matrix format back into a dense array (format auto-detected)."""
    with open(path) as fh:
        text = fh.read()
    if text.startswith("# n="):
        first, _, body = text.partition("\n")
        n = int(first[4:])
        M = np.zeros((n, n))
        for lineno, row in enumerate(csv.reader(io.StringIO(body)), start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValidationError(f"{path}:{lineno}: expected i,j,value")
            M[int(row[0]), int(row[1])] = float(row[2])
        return M
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    try:
        M = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{path}: matrix is not square")
    return M


def write_embedding_csv(coords, path, labels=None, ids=None) -> None:
    """Embedding table with header ``id,label,x_1..x_d`` (label blank if unknown).

    ``ids`` defaults to ``0 .. n-1``; ``labels`` is aligned with the rows.
    """
    coords = np.asarray(coords, dtype=float)
    ids = range(coords.shape[0]) if ids is None else ids
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "label"] + [f"x_{k + 1}" for k in range(coords.shape[1])])
        for k, (i, row) in enumerate(zip(ids, coords)):
            lab = "" if labels is None else str(labels[k])
            w.writerow([int(i), lab] + [repr(float(v)) for v in row])


def read_embedding_csv(path, return_ids=False):
    """Inverse of :func:`write_embedding_csv`; returns ``(coords, labels[, ids])``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["id", "label"]:
        raise ValidationError(f"{path}: not an embedding file")
    body = rows[1:]
    coords = np.array([[float(v) for v in r[2:]] for r in body]).reshape(len(body), -1)
    labels = [r[1] for r in body]
    labels = None if all(v == "" for v in labels) else labels
    if return_ids:
        return coords, labels, np.array([int(r[0]) for r in body], dtype=np.int64)
    return coords, labels
