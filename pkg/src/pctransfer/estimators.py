"""Transferred estimators and their closed-form tuning parameters.

Each estimator is alignment preprocessing followed by one solver call on a
length-``n0`` vector:

===================== ======================================================
target only           solve(y)
unisource             solve(average(y1, n0))
multisource           solve(mean_k average(y_k, n0))
affine                solve_l0(A_left @ y1)
target + unisource    solve_l0(average(interleave_pair(y, y1), n0))
target + multisource  solve_l0(average_multi(interleave_all(y, ys), n0, ...))
===================== ======================================================
"""

from __future__ import annotations

import enum
import math
from typing import Optional, Sequence

import numpy as np

from .alignment import average, average_multi, interleave_all, interleave_pair
from .exceptions import DimensionError, PreconditionError
from .signal import Penalty, PenaltySpec, SourceDataset, _freeze, as_signal
from .solvers import solve, solve_l0

__all__ = [
    "EstimatorKind",
    "LeftInverseMatrix",
    "transfer_input",
    "multisource_input",
    "target_unisource_input",
    "target_multisource_input",
    "estimate_target_only",
    "estimate_unisource",
    "estimate_multisource",
    "estimate_affine",
    "estimate_target_unisource",
    "estimate_target_multisource",
    "theoretical_lambda",
]


class EstimatorKind(str, enum.Enum):
    TARGET_ONLY = "target"
    UNISOURCE = "unisource"
    MULTISOURCE = "multisource"
    AFFINE = "affine"
    TARGET_UNISOURCE = "target-unisource"
    TARGET_MULTISOURCE = "target-multisource"


class LeftInverseMatrix:
    """Dense ``n0 x n1`` matrix ``A_left`` with ``A_left @ A = I``.

    Parameters
    ----------
    entries : array_like, shape (n0, n1)
    forward : array_like, shape (n1, n0), optional
        The matrix ``A`` it is claimed to invert. When given, the identity
        is checked to ``atol`` and a ``ValueError`` raised if it fails.
    """

    def __init__(self, entries, forward=None, atol: float = 1e-10):
        mat = np.array(entries, dtype=np.float64)
        if mat.ndim != 2 or 0 in mat.shape:
            raise DimensionError(f"left inverse must be a nonempty matrix, got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValueError("left inverse contains NaN or infinite values")
        if forward is not None:
            a = np.asarray(forward, dtype=np.float64)
            if a.shape != (mat.shape[1], mat.shape[0]):
                raise DimensionError(
                    f"forward matrix has shape {a.shape}, expected {(mat.shape[1], mat.shape[0])}"
                )
            if not np.allclose(mat @ a, np.eye(mat.shape[0]), rtol=0.0, atol=atol):
                raise ValueError("supplied matrix is not a left inverse of the forward matrix")
        mat.setflags(write=False)
        self.entries = mat

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def norm(self) -> float:
        """Spectral norm."""
        return float(np.linalg.norm(self.entries, 2))

    def apply(self, data) -> np.ndarray:
        """``A_left @ data`` in centered form.

        Row ``i`` is evaluated as ``s_i * r_i + sum_j a_ij (x_j - r_i)`` over
        its nonzero columns, where ``r_i`` is ``x`` at the first of them and
        ``s_i`` the row sum. A row whose nonzero weights are all equal and sum
        to 1 up to rounding is a block mean and is evaluated as
        ``r_i + mean(x_j - r_i)``, bit-identical to :func:`average`.
        """
        x = np.asarray(data, dtype=np.float64)
        if x.ndim != 1 or x.size != self.cols:
            raise DimensionError(f"left inverse has {self.cols} columns but data has shape {x.shape}")
        tol = self.cols * np.finfo(np.float64).eps
        out = np.zeros(self.rows)
        for i, row in enumerate(self.entries):
            nz = np.flatnonzero(row)
            if nz.size == 0:
                continue
            w = row[nz]
            ref = x[nz[0]]
            dev = x[nz] - ref
            total = float(np.sum(w))
            if abs(total - 1.0) <= tol and np.all(w == w[0]):
                out[i] = ref + np.mean(dev)
            else:
                out[i] = total * ref + float(np.dot(w, dev))
        return _freeze(out)


def _stable_mean(vectors: Sequence[np.ndarray]) -> np.ndarray:
    first = vectors[0]
    if len(vectors) == 1:
        return first
    dev = np.mean([v - first for v in vectors], axis=0)
    return first + dev


def _check_sources(sources: Sequence[SourceDataset]) -> None:
    if len(sources) == 0:
        raise ValueError("need at least one source dataset")


def transfer_input(source: SourceDataset, n0: int) -> np.ndarray:
    """Averaged source vector fed to the unisource solver."""
    if source.n < n0:
        raise PreconditionError(
            f"source {source.index} has n={source.n} < n0={n0}; the unisource "
            "estimator needs n1 >= n0; use the target-unisource estimator "
            "(estimate_target_unisource, CLI --method target-unisource) instead"
        )
    return average(source.data, n0)


def multisource_input(sources: Sequence[SourceDataset], n0: int) -> np.ndarray:
    """Arithmetic mean of the per-source averaged vectors."""
    _check_sources(sources)
    for s in sources:
        if s.n < n0:
            raise PreconditionError(
                f"source {s.index} has n={s.n} < n0={n0}; the multisource estimator "
                "needs every n_k >= n0; use the target-multisource estimator "
                "(estimate_target_multisource, CLI --method target-multisource) instead"
            )
    return _freeze(_stable_mean([average(s.data, n0) for s in sources]))


def target_unisource_input(y, source: SourceDataset) -> np.ndarray:
    y = as_signal(y, "target")
    return average(interleave_pair(y, source.data), y.size)


def target_multisource_input(y, sources: Sequence[SourceDataset]) -> np.ndarray:
    y = as_signal(y, "target")
    _check_sources(sources)
    lens = [y.size] + [s.n for s in sources]
    return average_multi(interleave_all(y, sources), y.size, lens)


def estimate_target_only(y, penalty: PenaltySpec) -> np.ndarray:
    """Fit the target data alone (fallback when no source is selected)."""
    return solve(as_signal(y, "target"), penalty)


def estimate_unisource(source: SourceDataset, n0: int, penalty: PenaltySpec) -> np.ndarray:
    """Transfer from one higher-frequency source; requires ``source.n >= n0``."""
    return solve(transfer_input(source, n0), penalty)


def estimate_multisource(
    sources: Sequence[SourceDataset], n0: int, penalty: PenaltySpec
) -> np.ndarray:
    return solve(multisource_input(sources, n0), penalty)


def estimate_affine(source: SourceDataset, a_left: LeftInverseMatrix, lam: float) -> np.ndarray:
    """l0 fit of ``a_left @ y1`` for a general left-invertible source map."""
    if a_left.cols != source.n:
        raise DimensionError(
            f"left inverse has {a_left.cols} columns but source has length {source.n}"
        )
    return solve_l0(a_left.apply(source.data), lam)


def estimate_target_unisource(y, source: SourceDataset, lam: float) -> np.ndarray:
    """l0 fit of the target merged with one source; any source length allowed."""
    return solve_l0(target_unisource_input(y, source), lam)


def estimate_target_multisource(y, sources: Sequence[SourceDataset], lam: float) -> np.ndarray:
    """l0 fit of the target merged with all sources, any source lengths.

    Every source block enters the average, including sources shorter than
    the target.
    """
    return solve_l0(target_multisource_input(y, sources), lam)


def theoretical_lambda(
    kind: EstimatorKind,
    penalty: Penalty,
    s0: Optional[int],
    n0: int,
    source_lens: Sequence[int] = (),
    c: float = 1.0,
    left_inverse_norm: Optional[float] = None,
) -> float:
    """Closed-form tuning parameter for an estimator.

    Parameters
    ----------
    kind, penalty
        Which estimator and penalty the value is for.
    s0 : int or None
        Number of target changepoints. ``None`` gives the s0-free variant,
        which is the same formula evaluated at ``s0 = 0``: ``c/sqrt(n1)``
        for l1 and ``c*(1 + log n0)/n1`` for l0 in the unisource case.
    n0 : int
        Target length.
    source_lens : sequence of int
        Lengths of the sources used (one entry for unisource kinds).
    c : float
        The absolute constant multiplying the rate.
    left_inverse_norm : float, optional
        Spectral norm of the left inverse, required for ``AFFINE``.

    Notes
    -----
    Natural logarithms throughout. The target-only rate substitutes ``n0``
    for the effective source sample size.
    """
    kind = EstimatorKind(kind)
    penalty = Penalty(penalty)
    s = 0 if s0 is None else int(s0)
    if s < 0 or n0 < 1 or c <= 0:
        raise ValueError("need s0 >= 0, n0 >= 1 and c > 0")
    lens = [int(m) for m in source_lens]
    if any(m < 1 for m in lens):
        raise ValueError("source lengths must be positive")
    log_term = 1.0 + math.log(n0 / (s + 1))

    if kind is EstimatorKind.TARGET_ONLY:
        eff = float(n0)
        l1_val = c / math.sqrt((s + 1) * eff)
    elif kind in (EstimatorKind.UNISOURCE, EstimatorKind.MULTISOURCE):
        if not lens:
            raise ValueError(f"{kind.value} tuning needs source lengths")
        if kind is EstimatorKind.UNISOURCE and len(lens) != 1:
            raise ValueError("unisource tuning takes exactly one source length")
        k = len(lens)
        inv_sum = sum(1.0 / m for m in lens)
        eff = k * k / inv_sum
        l1_val = c / k * math.sqrt(inv_sum / (s + 1))
    elif kind is EstimatorKind.AFFINE:
        if left_inverse_norm is None or left_inverse_norm <= 0:
            raise ValueError("affine tuning needs the left inverse spectral norm")
        eff = n0 / left_inverse_norm**2
        l1_val = None
    elif kind is EstimatorKind.TARGET_UNISOURCE:
        if len(lens) != 1:
            raise ValueError("target-unisource tuning takes exactly one source length")
        eff = float(lens[0] + n0)
        l1_val = None
    elif kind is EstimatorKind.TARGET_MULTISOURCE:
        if not lens:
            raise ValueError("target-multisource tuning needs source lengths")
        eff = float(sum(m for m in [n0] + lens if m >= n0))
        l1_val = None
    else:  # pragma: no cover
        raise ValueError(f"unknown estimator kind {kind}")

    if penalty is Penalty.L1:
        if l1_val is None:
            raise ValueError(f"{kind.value} estimator is defined for the l0 penalty only")
        return l1_val
    return c * log_term / eff
