"""Exact solvers for the two penalised least-squares problems.

Both minimise ``(1/(2*n0)) * ||v - theta||^2 + lam * pen(D theta)`` over
``theta`` in R^n0, where ``pen`` is the l1 norm (fused lasso / total
variation) or the l0 count (number of changepoints). The ``1/(2*n0)``
scaling stays inside the objective so theoretical tuning formulas apply
to ``lam`` verbatim.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .exceptions import DimensionError
from .signal import Penalty, PenaltySpec, _freeze

__all__ = ["solve_l1", "solve_l0", "solve", "objective_value", "L0_TIE_RTOL"]

L0_TIE_RTOL = 1e-12


def _input(v) -> np.ndarray:
    arr = np.ascontiguousarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError("solver input must be a nonempty 1-D vector")
    return arr


def _check_lam(lam: float) -> float:
    lam = float(lam)
    if not np.isfinite(lam) or lam < 0:
        raise ValueError(f"lambda must be finite and >= 0, got {lam}")
    return lam


def solve_l1(v, lam: float) -> np.ndarray:
    """Fused-lasso fit: the unique minimiser with an l1 penalty on differences.

    Uses Condat's direct taut-string algorithm on the rescaled problem
    ``0.5*||v - theta||^2 + n0*lam*||D theta||_1``; linear time in practice,
    exact up to floating-point rounding.
    """
    v = _input(v)
    lam = _check_lam(lam)
    # a constant vector is its own minimiser; skip the sweep's rounding
    if lam == 0.0 or np.all(v == v[0]):
        return _freeze(v.copy())
    return _freeze(_kernels.tv1d_denoise(v, v.size * lam))


def segment_means(v: np.ndarray, ends) -> np.ndarray:
    """Piecewise-constant vector holding the mean of ``v`` on each segment."""
    out = np.empty_like(v)
    start = 0
    for end in ends:
        seg = v[start:end]
        # centered form: a constant segment reproduces its value exactly
        out[start:end] = seg[0] + np.mean(seg - seg[0])
        start = end
    return out


def solve_l0(v, lam: float) -> np.ndarray:
    """Global minimiser with an l0 penalty on differences (optimal partitioning).

    Runs an O(n0^2) dynamic programme over segment ends with prefix-sum
    segment costs. Among partitions whose objectives agree within
    ``L0_TIE_RTOL`` the one with fewest changepoints wins, then the
    lexicographically smallest changepoint set.
    """
    v = _input(v)
    lam = _check_lam(lam)
    if lam == 0.0:
        return _freeze(v.copy())
    ends = _kernels.optimal_partition(v, 0.5 / v.size, lam, L0_TIE_RTOL)
    return _freeze(segment_means(v, ends))


def solve(v, penalty: PenaltySpec) -> np.ndarray:
    """Dispatch to :func:`solve_l1` or :func:`solve_l0` by penalty kind."""
    if penalty.kind is Penalty.L1:
        return solve_l1(v, penalty.lam)
    return solve_l0(v, penalty.lam)


def objective_value(v, theta, penalty: PenaltySpec, n0: int | None = None) -> float:
    """Evaluate ``(1/(2 n0))||v - theta||^2 + lam * pen(D theta)``.

    The l0 count uses exact zero comparison of consecutive differences.
    """
    v = np.asarray(v, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if v.shape != theta.shape or v.ndim != 1:
        raise DimensionError(f"length mismatch: {v.shape} vs {theta.shape}")
    n0 = v.size if n0 is None else int(n0)
    if n0 != v.size:
        raise DimensionError(f"n0={n0} but vectors have length {v.size}")
    r = v - theta
    fit = float(np.dot(r, r)) / (2.0 * n0)
    d = np.diff(theta)
    if penalty.kind is Penalty.L1:
        pen = float(np.sum(np.abs(d)))
    else:
        pen = float(np.count_nonzero(d))
    return fit + penalty.lam * pen
