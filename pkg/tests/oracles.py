"""Naive reference implementations used only by the test-suite.

Distances enumerate every admissible alignment path explicitly; nothing
here shares code with the package kernels.
"""
import math

import numpy as np


def _paths(n, m, start, allowed):
    """All monotone paths of cells from ``start`` to ``(n - 1, m - 1)``.

    Steps are (1, 1), (1, 0) and (0, 1); each step is reported with its type.
    """
    out = []

    def rec(i, j, steps):
        if (i, j) == (n - 1, m - 1):
            out.append(list(steps))
            return
        for di, dj, name in ((1, 1, "diag"), (1, 0, "down"), (0, 1, "right")):
            ni, nj = i + di, j + dj
            if ni < n and nj < m and allowed(ni, nj):
                steps.append((ni, nj, name))
                rec(ni, nj, steps)
                steps.pop()

    rec(start[0], start[1], [])
    return out


def band(window, n, m, widen):
    w = int(round(window * max(n, m)))
    if widen:
        w = max(w, abs(n - m))
    return w


def dtw_brute(a, b, window=1.0, weights=None):
    n, m = len(a), len(b)
    w = band(window, n, m, True)
    if weights is None:
        weights = [1.0] * max(n, m)
    best = math.inf
    # index 0 in each dimension is the (0, 0) origin of the cost table
    for path in _paths(n + 1, m + 1, (0, 0),
                       lambda i, j: i >= 1 and j >= 1 and abs(i - j) <= w):
        acc = 0.0
        for i, j, _ in path:
            diff = a[i - 1] - b[j - 1]
            acc = acc + weights[abs(i - j)] * diff * diff
        best = min(best, acc)
    return best


def wdtw_brute(a, b, g):
    L = max(len(a), len(b))
    weights = [1.0 / (1.0 + math.exp(-g * (k - L / 2.0))) for k in range(L)]
    return dtw_brute(a, b, 1.0, weights)


def derivative(a):
    return [((a[i] - a[i - 1]) + (a[i + 1] - a[i - 1]) / 2.0) / 2.0
            for i in range(1, len(a) - 1)]


def erp_brute(a, b, g, window=1.0):
    n, m = len(a), len(b)
    w = band(window, n, m, True)
    best = math.inf
    for path in _paths(n + 1, m + 1, (0, 0), lambda i, j: abs(i - j) <= w):
        acc = 0.0
        for i, j, kind in path:
            if kind == "diag":
                acc = acc + abs(a[i - 1] - b[j - 1])
            elif kind == "down":
                acc = acc + abs(a[i - 1] - g)
            else:
                acc = acc + abs(b[j - 1] - g)
        best = min(best, acc)
    return best


def twe_brute(a, b, nu, lam):
    A = [0.0] + list(a)
    B = [0.0] + list(b)
    n, m = len(A), len(B)
    best = math.inf
    for path in _paths(n, m, (0, 0), lambda i, j: True):
        # paths may not run along the zero row/column past the origin
        if any((i == 0) != (j == 0) for i, j, _ in path):
            continue
        acc = 0.0
        for i, j, kind in path:
            if kind == "diag":
                acc = acc + (abs(A[i] - B[j]) + abs(A[i - 1] - B[j - 1])
                             + nu * (2.0 * abs(i - j)))
            elif kind == "down":
                acc = acc + (abs(A[i] - A[i - 1]) + nu + lam)
            else:
                acc = acc + (abs(B[j] - B[j - 1]) + nu + lam)
        best = min(best, acc)
    return best


def msm_brute(a, b, c):
    def cost(new, x, y):
        if x <= new <= y or x >= new >= y:
            return c
        return c + min(abs(new - x), abs(new - y))

    n, m = len(a), len(b)
    best = math.inf
    for path in _paths(n, m, (0, 0), lambda i, j: True):
        acc = abs(a[0] - b[0])
        pi, pj = 0, 0
        for i, j, kind in path:
            if kind == "diag":
                acc = acc + abs(a[i] - b[j])
            elif kind == "down":
                acc = acc + cost(a[i], a[pi], b[pj])
            else:
                acc = acc + cost(b[j], a[pi], b[pj])
            pi, pj = i, j
        best = min(best, acc)
    return best


def lcss_brute(a, b, epsilon, window=1.0):
    """Longest common subsequence by enumerating every increasing matching."""
    n, m = len(a), len(b)
    w = band(window, n, m, False)
    ok = [(i, j) for i in range(n) for j in range(m)
          if abs(i - j) <= w and abs(a[i] - b[j]) <= epsilon]

    def longest(last_i, last_j):
        best = 0
        for i, j in ok:
            if i > last_i and j > last_j:
                best = max(best, 1 + longest(i, j))
        return best

    return 1.0 - longest(-1, -1) / min(n, m)


def ed_brute(a, b):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def brute_distance(measure, a, b):
    """Dispatch a :class:`DistanceMeasure` to its brute-force oracle."""
    k = measure.kind
    a, b = list(map(float, a)), list(map(float, b))
    if k in ("DDTW", "WDDTW"):
        a, b = derivative(a), derivative(b)
    if k in ("DTW", "DDTW"):
        return dtw_brute(a, b, measure.window)
    if k in ("WDTW", "WDDTW"):
        return wdtw_brute(a, b, measure.g)
    if k == "ERP":
        return erp_brute(a, b, measure.g_erp, measure.window)
    if k == "TWE":
        return twe_brute(a, b, measure.nu, measure.lam)
    if k == "MSM":
        return msm_brute(a, b, measure.c)
    if k == "LCSS":
        return lcss_brute(a, b, measure.epsilon, measure.window)
    return ed_brute(a, b)


def naive_gap(inbag_counts, leaves, n):
    """Tree-by-tree evaluation of GAP proximities with explicit multisets.

    ``inbag_counts[t][j]`` is the bootstrap multiplicity of ``j`` in tree
    ``t`` and ``leaves[t][j]`` the leaf reached by ``j``.
    """
    T = len(inbag_counts)
    P = np.zeros((n, n))
    defined = np.zeros(n, dtype=bool)
    for i in range(n):
        S_i = [t for t in range(T) if inbag_counts[t][i] == 0]
        if not S_i:
            continue
        defined[i] = True
        for j in range(n):
            total = 0.0
            for t in S_i:
                bag = []
                for k in range(n):
                    bag.extend([k] * int(inbag_counts[t][k]))
                M = [k for k in bag if leaves[t][k] == leaves[t][i]]
                J = set(M)
                if j in J:
                    total = total + bag.count(j) / len(M)
            P[i, j] = total / len(S_i)
    return P, defined


def naive_lof(d, k):
    """Local outlier factor straight from the definition, k-distance ties included.

    Sums are exact (``math.fsum``) so results do not depend on summation order.
    Infinite densities (duplicate groups) follow ``inf / inf = 1``.
    """
    n = d.shape[0]
    kdist = []
    neigh = []
    for i in range(n):
        others = sorted(d[i, j] for j in range(n) if j != i)
        kd = others[k - 1]
        kdist.append(kd)
        neigh.append([j for j in range(n) if j != i and d[i, j] <= kd])
    lrd = []
    for i in range(n):
        reach = [max(kdist[j], d[i, j]) for j in neigh[i]]
        mean = math.fsum(reach) / len(reach)
        # duplicates: zero mean reachability means infinite density
        lrd.append(1.0 / mean if mean > 0 else math.inf)
    out = []
    for i in range(n):
        nb = [lrd[j] for j in neigh[i]]
        num = math.inf if math.inf in nb else math.fsum(nb) / len(nb)
        if math.isinf(num) and math.isinf(lrd[i]):
            out.append(1.0)
        elif math.isinf(lrd[i]):
            out.append(0.0)
        else:
            out.append(num / lrd[i])
    return np.array(out)
