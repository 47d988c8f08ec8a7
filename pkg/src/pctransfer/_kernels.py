"""Compiled inner loops for the two penalised least-squares solvers."""

import numpy as np
from numba import njit


@njit(cache=True)
def tv1d_denoise(y, lam):
    """Exact minimiser of ``0.5*||y - x||^2 + lam*sum|x_i - x_{i+1}|``.

    Condat's direct algorithm (IEEE SPL 20(11), 2013): a single forward
    sweep with local backtracking, no iterations and no tolerance.
    """
    n = y.shape[0]
    x = np.empty(n)
    if n == 0:
        return x
    if n == 1 or lam <= 0.0:
        for i in range(n):
            x[i] = y[i]
        return x
    k = 0
    k0 = 0
    kplus = 0
    kminus = 0
    umin = lam
    umax = -lam
    vmin = y[0] - lam
    vmax = y[0] + lam
    twolam = 2.0 * lam
    while True:
        while k == n - 1:
            if umin < 0.0:
                while True:
                    x[k0] = vmin
                    k0 += 1
                    if k0 > kminus:
                        break
                k = k0
                kminus = k0
                vmin = y[k0]
                umin = lam
                umax = vmin + umin - vmax
            elif umax > 0.0:
                while True:
                    x[k0] = vmax
                    k0 += 1
                    if k0 > kplus:
                        break
                k = k0
                kplus = k0
                vmax = y[k0]
                umax = -lam
                umin = vmax + umax - vmin
            else:
                vmin += umin / (k - k0 + 1)
                while True:
                    x[k0] = vmin
                    k0 += 1
                    if k0 > k:
                        break
                return x
        umin += y[k + 1] - vmin
        if umin < -lam:
            while True:
                x[k0] = vmin
                k0 += 1
                if k0 > kminus:
                    break
            k = k0
            kminus = k0
            kplus = k0
            vmin = y[k0]
            vmax = vmin + twolam
            umin = lam
            umax = -lam
        else:
            umax += y[k + 1] - vmax
            if umax > lam:
                while True:
                    x[k0] = vmax
                    k0 += 1
                    if k0 > kplus:
                        break
                k = k0
                kminus = k0
                kplus = k0
                vmax = y[k0]
                vmin = vmax - twolam
                umin = lam
                umax = -lam
            else:
                k += 1
                if umin >= lam:
                    kminus = k
                    vmin += (umin - lam) / (kminus - k0 + 1)
                    umin = lam
                if umax <= -lam:
                    kplus = k
                    vmax += (umax + lam) / (kplus - k0 + 1)
                    umax = -lam


@njit(cache=True)
def optimal_partition(y, scale, penalty, rtol):
    """Optimal partitioning by a suffix dynamic programme.

    Minimises ``scale * sum(segment SSE) + penalty * (#segments - 1)``.
    Returns the segment end positions (exclusive, last one is ``n``).

    Ties within ``rtol`` (relative, floor 1) prefer fewer segments and then
    the smallest next boundary, which yields the lexicographically smallest
    changepoint set among the optimal partitions with fewest changepoints.
    """
    n = y.shape[0]
    centre = 0.0
    for i in range(n):
        centre += y[i]
    centre /= n
    s1 = np.zeros(n + 1)
    s2 = np.zeros(n + 1)
    for i in range(n):
        d = y[i] - centre
        s1[i + 1] = s1[i] + d
        s2[i + 1] = s2[i] + d * d
    best = np.empty(n + 1)
    count = np.zeros(n + 1, dtype=np.int64)
    nxt = np.empty(n + 1, dtype=np.int64)
    best[n] = 0.0
    nxt[n] = n
    for s in range(n - 1, -1, -1):
        b_cost = np.inf
        b_cnt = 0
        b_t = n
        for t in range(s + 1, n + 1):
            a = s1[t] - s1[s]
            sse = s2[t] - s2[s] - a * a / (t - s)
            if sse < 0.0:
                sse = 0.0
            c = scale * sse + penalty + best[t]
            cnt = count[t] + 1
            tol = rtol * max(1.0, abs(b_cost)) if b_cost < np.inf else 0.0
            if c < b_cost - tol:
                b_cost = c
                b_cnt = cnt
                b_t = t
            elif c <= b_cost + tol and cnt < b_cnt:
                b_cost = min(c, b_cost)
                b_cnt = cnt
                b_t = t
        best[s] = b_cost
        count[s] = b_cnt
        nxt[s] = b_t
    ends = np.empty(count[0], dtype=np.int64)
    s = 0
    i = 0
    while s < n:
        s = nxt[s]
        ends[i] = s
        i += 1
    return ends
