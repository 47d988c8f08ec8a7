"""Data-driven tuning: k-fold cross-validation of the penalty level and the
permutation rule for the selection threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._random import keyed_rng
from .signal import Penalty, PenaltySpec, SourceDataset, as_signal
from .selection import deviation, screened_statistic
from .solvers import solve

__all__ = [
    "CvSpec",
    "PermutationSpec",
    "default_grid",
    "cv_scores",
    "cv_select_lambda",
    "cv_fit",
    "default_smoother",
    "permutation_draws",
    "permutation_threshold",
    "order_statistic_quantile",
]

GRID_SIZE = 30
GRID_SPAN = (1e-4, 1e2)


def default_grid(v, size: int = GRID_SIZE) -> np.ndarray:
    """Log-spaced grid over ``[1e-4, 1e2]`` times the variance of first differences."""
    v = np.asarray(v, dtype=np.float64)
    scale = float(np.var(np.diff(v), ddof=1)) if v.size >= 3 else 0.0
    if not np.isfinite(scale) or scale <= 0.0:
        scale = 1.0
    return scale * np.logspace(math.log10(GRID_SPAN[0]), math.log10(GRID_SPAN[1]), size)


@dataclass(frozen=True)
class CvSpec:
    """Cross-validation settings.

    Folds are the residue classes ``i mod folds``. ``grid=None`` means
    :func:`default_grid` of the data being tuned.
    """

    folds: int = 5
    grid: Optional[tuple] = None

    def __post_init__(self):
        if int(self.folds) < 2:
            raise ValueError(f"need at least 2 folds, got {self.folds}")
        object.__setattr__(self, "folds", int(self.folds))
        if self.grid is not None:
            g = tuple(float(x) for x in self.grid)
            if not g:
                raise ValueError("CV grid is empty")
            if any(x < 0 or not np.isfinite(x) for x in g):
                raise ValueError("CV grid values must be finite and >= 0")
            if any(b <= a for a, b in zip(g, g[1:])):
                raise ValueError("CV grid must be strictly increasing")
            object.__setattr__(self, "grid", g)

    def grid_for(self, v) -> np.ndarray:
        return np.asarray(self.grid) if self.grid is not None else default_grid(v)


def _fold_plan(n: int, folds: int):
    idx = np.arange(n)
    plan = []
    for f in range(folds):
        test = idx[idx % folds == f]
        train = idx[idx % folds != f]
        # nearest training index, ties to the left
        right = np.searchsorted(train, test)
        left = right - 1
        has_left = left >= 0
        has_right = right < train.size
        d_left = np.where(has_left, test - train[np.clip(left, 0, None)], np.iinfo(np.int64).max)
        d_right = np.where(
            has_right, train[np.clip(right, None, train.size - 1)] - test, np.iinfo(np.int64).max
        )
        nearest = np.where(d_left <= d_right, left, right)
        plan.append((train, test, nearest))
    return plan


def cv_scores(v, kind: Penalty, grid: Sequence[float], folds: int = 5) -> np.ndarray:
    """Total held-out squared error for each ``lam`` in ``grid``."""
    v = np.asarray(v, dtype=np.float64)
    kind = Penalty(kind)
    if v.size < folds:
        raise ValueError(f"need at least {folds} points for {folds}-fold CV, got {v.size}")
    plan = _fold_plan(v.size, folds)
    scores = np.zeros(len(grid))
    for j, lam in enumerate(grid):
        pen = PenaltySpec(kind, lam)
        total = 0.0
        for train, test, nearest in plan:
            fit = solve(v[train], pen)
            err = v[test] - fit[nearest]
            total += float(np.dot(err, err))
        scores[j] = total
    return scores


def cv_select_lambda(v, kind: Penalty, spec: CvSpec = CvSpec()) -> float:
    """Pick the grid value with the lowest cross-validation error (ties: smallest)."""
    v = as_signal(v)
    grid = spec.grid_for(v)
    if len(grid) == 0:
        raise ValueError("CV grid is empty")
    if len(grid) == 1:
        return float(grid[0])
    scores = cv_scores(v, kind, grid, spec.folds)
    return float(grid[int(np.argmin(scores))])


def cv_fit(v, kind: Penalty, spec: CvSpec = CvSpec()) -> tuple[np.ndarray, float]:
    """Cross-validate, then fit the full vector; returns ``(fit, lam)``."""
    lam = cv_select_lambda(v, kind, spec)
    return solve(v, PenaltySpec(kind, lam)), lam


def default_smoother(v) -> np.ndarray:
    """l0 fit with a cross-validated penalty.

    Preferred over the fused lasso here because its residuals track the
    noise level more closely, which keeps the permutation null from being
    too narrow.
    """
    return cv_fit(v, Penalty.L0)[0]


@dataclass(frozen=True)
class PermutationSpec:
    """Settings of the permutation threshold rule.

    ``fit`` maps a source vector to its smoothed version; residuals from it
    are permuted. Replicate ``b`` draws from a generator keyed by
    ``(rng_seed, b)``.
    """

    B: int = 1000
    q: float = 0.999
    fit: Callable = field(default=default_smoother, compare=False)
    rng_seed: int = 0

    def __post_init__(self):
        if int(self.B) < 1:
            raise ValueError(f"need B >= 1, got {self.B}")
        if not 0.0 < float(self.q) < 1.0:
            raise ValueError(f"quantile level must lie in (0, 1), got {self.q}")
        object.__setattr__(self, "B", int(self.B))
        object.__setattr__(self, "q", float(self.q))


def order_statistic_quantile(values, q: float) -> float:
    """Type-1 empirical quantile: the ``ceil(q*B)``-th smallest value."""
    vals = np.sort(np.asarray(values, dtype=np.float64))
    rank = max(1, math.ceil(q * vals.size - 1e-9))
    return float(vals[rank - 1])


def permutation_draws(
    y, sources: Sequence[SourceDataset], widths: Sequence[int], spec: PermutationSpec
) -> np.ndarray:
    """The replicate statistics ``tau^1 .. tau^B`` in draw order."""
    y = as_signal(y, "target")
    if len(sources) == 0:
        raise ValueError("permutation threshold needs at least one source")
    if len(widths) != len(sources):
        raise ValueError(f"{len(widths)} screening widths for {len(sources)} sources")
    norms = [float(np.sum(deviation(y, s.data) ** 2)) for s in sources]
    k_hat = int(np.argmin(norms))
    src = sources[k_hat]
    width = int(widths[k_hat])
    fitted = np.asarray(spec.fit(src.data), dtype=np.float64)
    resid = src.data - fitted
    draws = np.empty(spec.B)
    for b in range(spec.B):
        perm = keyed_rng(spec.rng_seed, b).permutation(resid)
        draws[b] = screened_statistic(deviation(y, fitted + perm), width)
    return draws


def permutation_threshold(
    y, sources: Sequence[SourceDataset], widths: Sequence[int], spec: PermutationSpec = PermutationSpec()
) -> float:
    """Threshold from permuting the residuals of the closest source.

    The source with the smallest unscreened deviation norm is smoothed with
    ``spec.fit``; its residuals are permuted ``B`` times, each permuted copy
    is screened like a real source, and the ``q`` quantile of the replicate
    statistics is returned.
    """
    return order_statistic_quantile(permutation_draws(y, sources, widths, spec), spec.q)
