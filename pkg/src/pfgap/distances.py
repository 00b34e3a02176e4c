"""Elastic distance measures for univariate time series.

Nine measures are available: ``DTW``, ``DDTW``, ``WDTW``, ``WDDTW``,
``TWE``, ``ED``, ``LCSS``, ``MSM`` and ``ERP``. The DTW family uses the
squared pointwise difference with no final square root; ``ED`` is the
ordinary Euclidean norm. ``TWE``, ``MSM``, ``ERP`` and ``LCSS`` use the
absolute pointwise difference.

Window parameters are fractions of the longer series length. For the
path-based measures (DTW family, ERP) the band is widened to at least the
length difference so an alignment always exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from . import _kernels as K

KINDS = ("DTW", "DDTW", "WDTW", "WDDTW", "TWE", "ED", "LCSS", "MSM", "ERP")
DERIVATIVE_KINDS = ("DDTW", "WDDTW")

_CODES = {
    "DTW": K.DTW, "DDTW": K.DTW, "WDTW": K.WDTW, "WDDTW": K.WDTW,
    "TWE": K.TWE, "ED": K.ED, "LCSS": K.LCSS, "MSM": K.MSM, "ERP": K.ERP,
}

# parameter name -> used by kinds
_REQUIRED = {
    "DTW": (), "DDTW": (), "WDTW": ("g",), "WDDTW": ("g",),
    "TWE": ("nu", "lam"), "ED": (), "LCSS": ("epsilon",), "MSM": ("c",),
    "ERP": ("g_erp",),
}
_WINDOWED = ("DTW", "DDTW", "LCSS", "ERP")

TWE_NU_GRID = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0)
TWE_LAMBDA_GRID = tuple(k * 0.1 / 9 for k in range(10))


@dataclass(frozen=True)
class DistanceMeasure:
    """A fully parameterized distance measure.

    Parameters
    ----------
    kind : str
        One of :data:`KINDS`.
    window : float, optional
        Band width as a fraction of the longer series, in [0, 1]. Used by
        DTW, DDTW, LCSS and ERP; defaults to 1 (unconstrained).
    g : float, optional
        Logistic weight steepness for WDTW / WDDTW, ``g >= 0``.
    nu, lam : float, optional
        TWE stiffness (``> 0``) and edit penalty (``>= 0``).
    epsilon : float, optional
        LCSS matching threshold, ``> 0``.
    c : float, optional
        MSM split/merge cost, ``> 0``.
    g_erp : float, optional
        ERP gap value.
    """

    kind: str
    window: float | None = None
    g: float | None = None
    nu: float | None = None
    lam: float | None = None
    epsilon: float | None = None
    c: float | None = None
    g_erp: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distance measure {self.kind!r}")
        allowed = set(_REQUIRED[self.kind])
        if self.kind in _WINDOWED:
            allowed.add("window")
            if self.window is None:
                object.__setattr__(self, "window", 1.0)
        for f in fields(self):
            if f.name == "kind":
                continue
            value = getattr(self, f.name)
            if f.name in allowed:
                if value is None:
                    raise ValueError(f"{self.kind} requires parameter {f.name!r}")
                if not math.isfinite(value):
                    raise ValueError(f"{f.name} must be finite")
                object.__setattr__(self, f.name, float(value))
            elif value is not None:
                raise ValueError(f"{self.kind} does not take parameter {f.name!r}")
        if self.window is not None and not 0.0 <= self.window <= 1.0:
            raise ValueError("window must lie in [0, 1]")
        if self.g is not None and self.g < 0:
            raise ValueError("g must be >= 0")
        if self.nu is not None and self.nu <= 0:
            raise ValueError("nu must be > 0")
        if self.lam is not None and self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.c is not None and self.c <= 0:
            raise ValueError("c must be > 0")

    @property
    def uses_derivative(self) -> bool:
        return self.kind in DERIVATIVE_KINDS

    def params(self) -> dict:
        """Parameters actually used by this kind."""
        return {f.name: getattr(self, f.name) for f in fields(self)
                if f.name != "kind" and getattr(self, f.name) is not None}

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params()}

    @classmethod
    def from_dict(cls, d: dict) -> "DistanceMeasure":
        return cls(**d)

    def kernel_args(self):
        """Integer kernel code and packed parameter vector."""
        p = np.zeros(3)
        if self.window is not None:
            p[0] = self.window
        k = self.kind
        if k in ("WDTW", "WDDTW"):
            p[1] = self.g
        elif k == "TWE":
            p[1], p[2] = self.nu, self.lam
        elif k == "LCSS":
            p[1] = self.epsilon
        elif k == "MSM":
            p[1] = self.c
        elif k == "ERP":
            p[1] = self.g_erp
        return _CODES[k], p

    def __call__(self, a, b) -> float:
        return distance(self, a, b)


def as_series(values, min_length: int = 2) -> np.ndarray:
    """Validate and convert one series to a contiguous float64 array."""
    x = np.ascontiguousarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("a time series must be one-dimensional")
    if x.shape[0] < min_length:
        raise ValueError(f"time series must have at least {min_length} points, "
                         f"got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("time series contains non-finite values")
    return x


def derivative_transform(a) -> np.ndarray:
    """Derivative estimate at interior points.

    ``d_i = ((a_i - a_{i-1}) + (a_{i+1} - a_{i-1}) / 2) / 2`` for
    ``i = 1 .. len(a) - 2``.
    """
    a = as_series(a, min_length=3)
    return ((a[1:-1] - a[:-2]) + (a[2:] - a[:-2]) / 2.0) / 2.0


def distance(m: DistanceMeasure, a, b) -> float:
    """Distance between two series under measure ``m``."""
    min_len = 3 if m.uses_derivative else 2
    a = as_series(a, min_len)
    b = as_series(b, min_len)
    if m.kind == "ED" and a.shape[0] != b.shape[0]:
        raise ValueError("ED requires equal-length series "
                         f"({a.shape[0]} vs {b.shape[0]})")
    if m.uses_derivative:
        a = derivative_transform(a)
        b = derivative_transform(b)
    code, p = m.kernel_args()
    return float(K.pair(code, a, b, p))


def pad_series(series) -> tuple[np.ndarray, np.ndarray]:
    """Stack variable-length series into a NaN-padded matrix plus lengths."""
    lens = np.array([len(s) for s in series], dtype=np.int64)
    X = np.full((len(series), int(lens.max())), np.nan)
    for i, s in enumerate(series):
        X[i, :lens[i]] = s
    return X, lens


def pairwise_distance_matrix(series, m: DistanceMeasure) -> np.ndarray:
    """Symmetric, zero-diagonal matrix of pairwise distances.

    ``series`` is a sequence of 1-D arrays or a :class:`~pfgap.dataio.TimeSeriesDataset`.
    """
    series = list(getattr(series, "series", series))
    min_len = 3 if m.uses_derivative else 2
    checked = []
    for i, s in enumerate(series):
        try:
            checked.append(as_series(s, min_len))
        except ValueError as exc:
            raise ValueError(f"series {i}: {exc}") from exc
    if m.kind == "ED":
        n0 = len(checked[0])
        for i, s in enumerate(checked):
            if len(s) != n0:
                raise ValueError(f"ED requires equal lengths: pair (0, {i}) has "
                                 f"lengths {n0} and {len(s)}")
    if m.uses_derivative:
        checked = [derivative_transform(s) for s in checked]
    X, lens = pad_series(checked)
    code, p = m.kernel_args()
    return K.pairwise(code, X, lens, p)


def dataset_stats(series) -> dict:
    """Pooled value standard deviation and maximum length of a training split."""
    series = list(getattr(series, "series", series))
    values = np.concatenate([np.asarray(s, dtype=float) for s in series])
    sigma = float(np.std(values))
    if not sigma > 0:
        sigma = 1.0
    return {"sigma": sigma, "l_max": max(len(s) for s in series)}


def sample_parameters(kind: str, stats: dict, rng: np.random.Generator) -> DistanceMeasure:
    """Draw a random parameterization of ``kind``.

    Integer band widths are drawn from ``0 .. l_max // 4`` and stored as
    the fraction ``w / l_max``. DTW and DDTW use the full window for half
    of the draws.
    """
    sigma = stats.get("sigma", 1.0)
    if not sigma > 0:
        sigma = 1.0
    l_max = int(stats["l_max"])

    def window():
        return int(rng.integers(0, l_max // 4 + 1)) / l_max

    if kind in ("DTW", "DDTW"):
        # half the draws are the unconstrained (full window) variant
        if rng.random() < 0.5:
            return DistanceMeasure(kind, window=1.0)
        return DistanceMeasure(kind, window=window())
    if kind in ("WDTW", "WDDTW"):
        return DistanceMeasure(kind, g=float(rng.uniform(0.0, 1.0)))
    if kind == "TWE":
        return DistanceMeasure(kind, nu=TWE_NU_GRID[rng.integers(len(TWE_NU_GRID))],
                               lam=TWE_LAMBDA_GRID[rng.integers(len(TWE_LAMBDA_GRID))])
    if kind == "ED":
        return DistanceMeasure(kind)
    if kind == "LCSS":
        return DistanceMeasure(kind, epsilon=float(rng.uniform(sigma / 5, sigma)),
                               window=window())
    if kind == "MSM":
        return DistanceMeasure(kind, c=float(10.0 ** rng.uniform(-2.0, 2.0)))
    if kind == "ERP":
        return DistanceMeasure(kind, g_erp=float(rng.uniform(sigma / 5, sigma)),
                               window=window())
    raise ValueError(f"unknown distance measure {kind!r}")


def default_measure(kind: str, stats: dict | None = None) -> DistanceMeasure:
    """Fixed parameterization used for the baseline dissimilarity matrices."""
    sigma = (stats or {}).get("sigma", 1.0)
    if kind in ("DTW", "DDTW"):
        return DistanceMeasure(kind, window=1.0)
    if kind in ("WDTW", "WDDTW"):
        return DistanceMeasure(kind, g=0.05)
    if kind == "TWE":
        return DistanceMeasure(kind, nu=1e-3, lam=1.0)
    if kind == "ED":
        return DistanceMeasure(kind)
    if kind == "LCSS":
        return DistanceMeasure(kind, epsilon=0.2 * sigma, window=1.0)
    if kind == "MSM":
        return DistanceMeasure(kind, c=1.0)
    if kind == "ERP":
        return DistanceMeasure(kind, g_erp=0.0, window=1.0)
    raise ValueError(f"unknown distance measure {kind!r}")
