"""Slow, obviously-correct reference implementations used as test oracles.

Nothing here imports the package's numerical internals; each oracle is
written from the defining formula with plain loops or dense matrices.
"""

import itertools
import math
from fractions import Fraction

import numpy as np


def ceil_div(a, b):
    return -(-a // b)


def dense_expansion(n, m):
    """m x n zero-one matrix, row i (1-based) maps to column j with
    ceil((j-1)m/n) < i <= ceil(jm/n)."""
    a = np.zeros((m, n))
    for j in range(1, n + 1):
        lo = ceil_div((j - 1) * m, n)
        hi = ceil_div(j * m, n)
        for i in range(lo + 1, hi + 1):
            a[i - 1, j - 1] = 1.0
    return a


def dense_averaging(n, m):
    """n x m row-stochastic block-mean matrix."""
    p = dense_expansion(n, m)
    return p.T / p.sum(axis=0)[:, None]


def loop_interleave_pair(y, y1):
    """Groups: source block j, then y_j."""
    n0, n1 = len(y), len(y1)
    out = []
    for j in range(1, n0 + 1):
        lo = ceil_div((j - 1) * n1, n0)
        hi = ceil_div(j * n1, n0)
        out.extend(y1[lo:hi])
        out.append(y[j - 1])
    return np.array(out)


def loop_interleave_all(y, sources):
    """Groups: y_j, then block j of every source in order."""
    n0 = len(y)
    out = []
    for j in range(1, n0 + 1):
        out.append(y[j - 1])
        for s in sources:
            nk = len(s)
            lo = ceil_div((j - 1) * nk, n0)
            hi = ceil_div(j * nk, n0)
            out.extend(s[lo:hi])
    return np.array(out)


def loop_average_multi(v, n, lens):
    """Mean of every group of the interleaved layout (group = target index)."""
    out = np.empty(n)
    pos = 0
    for j in range(1, n + 1):
        size = sum(ceil_div(j * m, n) - ceil_div((j - 1) * m, n) for m in lens)
        out[j - 1] = np.mean(v[pos:pos + size])
        pos += size
    return out


def l0_objective(v, theta, lam):
    n = len(v)
    r = np.asarray(v) - np.asarray(theta)
    return float(r @ r) / (2 * n) + lam * int(np.count_nonzero(np.diff(theta)))


def _subset_table(n):
    bits = np.array(list(itertools.product((0, 1), repeat=n - 1)), dtype=np.int64)
    if n == 1:
        bits = np.zeros((1, 0), dtype=np.int64)
    labels = np.concatenate([np.zeros((bits.shape[0], 1), dtype=np.int64), np.cumsum(bits, axis=1)], axis=1)
    return bits.sum(axis=1), labels


_TABLES = {}


def brute_force_l0(v, lam):
    """Exhaustive minimum of the l0 objective over all 2^(n-1) segmentations.

    Returns ``(best_objective, best_theta)``.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    if n not in _TABLES:
        _TABLES[n] = _subset_table(n)
    ncp, labels = _TABLES[n]
    rows = labels.shape[0]
    flat = labels + (np.arange(rows) * n)[:, None]
    sums = np.bincount(flat.ravel(), weights=np.tile(v, rows), minlength=rows * n)
    counts = np.bincount(flat.ravel(), minlength=rows * n)
    means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    fitted = means[flat]
    rss = np.sum((fitted - v) ** 2, axis=1)
    obj = rss / (2 * n) + lam * ncp
    best = int(np.argmin(obj))
    return float(obj[best]), fitted[best]


def l1_subgradient(v, theta, lam):
    """Dual certificate g with D^T g = (v - theta)/(n lam); g_j for j=1..n-1.

    ``(D theta)_j = theta_j - theta_{j+1}``; D^T g has entries
    g_1, g_2 - g_1, ..., -g_{n-1}, so g is the running sum of the residual.
    Returns the full running sum, whose last entry should vanish.
    """
    n = len(v)
    return np.cumsum(np.asarray(v) - np.asarray(theta)) / (n * lam)


def naive_screened(delta, t):
    """Sum of squares of the t largest |delta| (ties: lower index first)."""
    idx = sorted(range(len(delta)), key=lambda i: (-abs(delta[i]), i))[:t]
    return float(sum(delta[i] ** 2 for i in idx))


def naive_cv_score(v, lam, folds, fit):
    """Modulo-fold CV score with nearest-training-index prediction (ties left)."""
    v = np.asarray(v, dtype=float)
    n = v.size
    total = 0.0
    for f in range(folds):
        train = [i for i in range(n) if i % folds != f]
        test = [i for i in range(n) if i % folds == f]
        theta = fit(v[train], lam)
        for i in test:
            best = min(range(len(train)), key=lambda p: (abs(train[p] - i), train[p]))
            total += (v[i] - theta[best]) ** 2
    return total


def naive_refine(a_hat, lens):
    """Minimise sum(1/n_k)/|S|^2 over nonempty subsets; ties: larger, then lexicographic."""
    best = None
    for size in range(len(a_hat), 0, -1):
        for combo in itertools.combinations(sorted(a_hat), size):
            val = sum(1.0 / lens[k] for k in combo) / size**2
            key = (val, -size, combo)
            if best is None or key < best[0]:
                best = (key, combo)
    return best[1]


def random_piecewise_constant(rng, n, max_jumps=None, low=-5, high=5):
    """Piecewise-constant vector with integer levels and distinct neighbours."""
    max_jumps = n - 1 if max_jumps is None else min(max_jumps, n - 1)
    k = int(rng.integers(0, max_jumps + 1))
    cps = np.sort(rng.choice(np.arange(1, n), size=k, replace=False)) if k else np.array([], int)
    bounds = [0, *cps.tolist(), n]
    f = np.empty(n)
    prev = None
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        level = prev
        while level == prev:
            level = float(rng.integers(low, high + 1))
        f[lo:hi] = level
        prev = level
    return f


def harmonic_curve(lens, k):
    return k / np.mean([1.0 / m for m in lens[:k]])


def type1_quantile(values, q):
    """ceil(q*B)-th order statistic, with q read as the decimal it was written as."""
    vals = sorted(values)
    rank = max(1, math.ceil(Fraction(str(q)) * len(vals)))
    return vals[rank - 1]
