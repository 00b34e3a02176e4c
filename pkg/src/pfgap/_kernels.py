"""Numba dynamic-programming kernels for the elastic distance measures.

All kernels take contiguous float64 arrays and scalar parameters and keep
two rolling rows of the cost table. Band widths are given in cells.
"""
import math

import numpy as np
from numba import njit

# Integer codes shared with ``distances.py``.
DTW, WDTW, TWE, ED, LCSS, MSM, ERP = 0, 1, 2, 3, 4, 5, 6

INF = np.inf


@njit(cache=True)
def band_cells(window, n, m, widen):
    w = int(round(window * max(n, m)))
    if widen and w < abs(n - m):
        w = abs(n - m)
    return w


@njit(cache=True)
def dtw(a, b, band, g, weighted):
    n = a.shape[0]
    m = b.shape[0]
    weights = np.ones(max(n, m))
    if weighted:
        half = max(n, m) / 2.0
        for k in range(weights.shape[0]):
            weights[k] = 1.0 / (1.0 + math.exp(-g * (k - half)))
    prev = np.full(m + 1, INF)
    cur = np.full(m + 1, INF)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur[:] = INF
        lo = max(1, i - band)
        hi = min(m, i + band)
        for j in range(lo, hi + 1):
            diff = a[i - 1] - b[j - 1]
            cost = weights[abs(i - j)] * diff * diff
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = best + cost
        prev, cur = cur, prev
    return prev[m]


@njit(cache=True)
def euclidean(a, b):
    s = 0.0
    for i in range(a.shape[0]):
        diff = a[i] - b[i]
        s += diff * diff
    return math.sqrt(s)


@njit(cache=True)
def lcss(a, b, band, epsilon):
    n = a.shape[0]
    m = b.shape[0]
    prev = np.zeros(m + 1)
    cur = np.zeros(m + 1)
    for i in range(1, n + 1):
        cur[0] = 0.0
        for j in range(1, m + 1):
            if abs(i - j) <= band and abs(a[i - 1] - b[j - 1]) <= epsilon:
                cur[j] = prev[j - 1] + 1.0
            elif prev[j] >= cur[j - 1]:
                cur[j] = prev[j]
            else:
                cur[j] = cur[j - 1]
        prev, cur = cur, prev
    return 1.0 - prev[m] / min(n, m)


@njit(cache=True)
def _msm_cost(new, x, y, c):
    if (x <= new <= y) or (x >= new >= y):
        return c
    return c + min(abs(new - x), abs(new - y))


@njit(cache=True)
def msm(a, b, c):
    n = a.shape[0]
    m = b.shape[0]
    prev = np.empty(m)
    cur = np.empty(m)
    prev[0] = abs(a[0] - b[0])
    for j in range(1, m):
        prev[j] = prev[j - 1] + _msm_cost(b[j], a[0], b[j - 1], c)
    for i in range(1, n):
        cur[0] = prev[0] + _msm_cost(a[i], a[i - 1], b[0], c)
        for j in range(1, m):
            best = prev[j - 1] + abs(a[i] - b[j])
            up = prev[j] + _msm_cost(a[i], a[i - 1], b[j], c)
            if up < best:
                best = up
            left = cur[j - 1] + _msm_cost(b[j], a[i], b[j - 1], c)
            if left < best:
                best = left
            cur[j] = best
        prev, cur = cur, prev
    return prev[m - 1]


@njit(cache=True)
def erp(a, b, band, gap):
    n = a.shape[0]
    m = b.shape[0]
    prev = np.full(m + 1, INF)
    cur = np.full(m + 1, INF)
    prev[0] = 0.0
    for j in range(1, min(m, band) + 1):
        prev[j] = prev[j - 1] + abs(b[j - 1] - gap)
    for i in range(1, n + 1):
        cur[:] = INF
        if i <= band:
            cur[0] = prev[0] + abs(a[i - 1] - gap)
        lo = max(1, i - band)
        hi = min(m, i + band)
        for j in range(lo, hi + 1):
            best = prev[j - 1] + abs(a[i - 1] - b[j - 1])
            up = prev[j] + abs(a[i - 1] - gap)
            if up < best:
                best = up
            left = cur[j - 1] + abs(b[j - 1] - gap)
            if left < best:
                best = left
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]


@njit(cache=True)
def twe(a, b, nu, lam):
    # Series are implicitly prefixed with a zero sample at timestamp 0.
    n = a.shape[0]
    m = b.shape[0]
    prev = np.full(m + 1, INF)
    cur = np.full(m + 1, INF)
    prev[0] = 0.0
    for i in range(1, n + 1):
        ai = a[i - 1]
        ai_prev = a[i - 2] if i > 1 else 0.0
        cur[0] = INF
        for j in range(1, m + 1):
            bj = b[j - 1]
            bj_prev = b[j - 2] if j > 1 else 0.0
            best = prev[j - 1] + (abs(ai - bj) + abs(ai_prev - bj_prev)
                                  + nu * (2.0 * abs(i - j)))
            up = prev[j] + (abs(ai - ai_prev) + nu + lam)
            if up < best:
                best = up
            left = cur[j - 1] + (abs(bj - bj_prev) + nu + lam)
            if left < best:
                best = left
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]


@njit(cache=True)
def pair(code, a, b, p):
    """Dispatch on measure code; ``p`` holds (window, p1, p2)."""
    if code == DTW:
        return dtw(a, b, band_cells(p[0], a.shape[0], b.shape[0], True), 0.0, False)
    if code == WDTW:
        return dtw(a, b, max(a.shape[0], b.shape[0]), p[1], True)
    if code == TWE:
        return twe(a, b, p[1], p[2])
    if code == ED:
        return euclidean(a, b)
    if code == LCSS:
        return lcss(a, b, band_cells(p[0], a.shape[0], b.shape[0], False), p[1])
    if code == MSM:
        return msm(a, b, p[1])
    return erp(a, b, band_cells(p[0], a.shape[0], b.shape[0], True), p[1])


@njit(cache=True)
def one_to_many(code, x, X, lens, idx, p):
    out = np.empty(idx.shape[0])
    for k in range(idx.shape[0]):
        r = idx[k]
        out[k] = pair(code, x, X[r, :lens[r]], p)
    return out


@njit(cache=True)
def pairwise(code, X, lens, p):
    n = X.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = pair(code, X[i, :lens[i]], X[j, :lens[j]], p)
            out[i, j] = d
            out[j, i] = d
    return out
