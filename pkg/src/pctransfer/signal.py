"""Core value types: signals, source datasets, penalties and the loss.

Signals are plain one-dimensional ``float64`` numpy arrays flagged read-only.
Changepoint sets follow the 1-based convention ``i`` meaning "a jump between
``theta[i-1]`` and ``theta[i]``" (0-based), which coincides with the 0-based
start position of the new segment.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import DimensionError

__all__ = [
    "Penalty",
    "PenaltySpec",
    "SourceDataset",
    "as_signal",
    "changepoints_of",
    "difference_apply",
    "mse_loss",
    "DEFAULT_CP_TOL",
]

DEFAULT_CP_TOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_signal(values, name: str = "signal") -> np.ndarray:
    """Validate ``values`` and return a fresh read-only float64 vector.

    Raises
    ------
    DimensionError
        If the input is not one-dimensional or is empty.
    ValueError
        If any entry is NaN or infinite.
    """
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} must have length >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite values")
    return _freeze(arr)


class Penalty(str, enum.Enum):
    L1 = "l1"
    L0 = "l0"


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty kind together with its nonnegative tuning parameter."""

    kind: Penalty
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "kind", Penalty(self.kind))
        lam = float(self.lam)
        if not np.isfinite(lam) or lam < 0:
            raise ValueError(f"penalty lambda must be finite and >= 0, got {self.lam}")
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class SourceDataset:
    """One source study: observed data, its 1-based index and optional truth."""

    data: np.ndarray
    index: int = 1
    truth: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "data", as_signal(self.data, "source data"))
        if int(self.index) < 1:
            raise ValueError(f"source index must be >= 1, got {self.index}")
        object.__setattr__(self, "index", int(self.index))
        if self.truth is not None:
            truth = as_signal(self.truth, "source truth")
            if truth.size != self.data.size:
                raise DimensionError(
                    f"source truth has length {truth.size}, data has {self.data.size}"
                )
            object.__setattr__(self, "truth", truth)

    @property
    def n(self) -> int:
        return int(self.data.size)


def mse_loss(estimate, truth) -> float:
    """Mean squared error ``(1/n) * sum((estimate - truth)**2)``."""
    est = np.asarray(estimate, dtype=np.float64)
    tru = np.asarray(truth, dtype=np.float64)
    if est.shape != tru.shape or est.ndim != 1:
        raise DimensionError(f"length mismatch: {est.shape} vs {tru.shape}")
    diff = est - tru
    return float(np.dot(diff, diff) / diff.size)


def difference_apply(theta) -> np.ndarray:
    """Return ``D @ theta`` with ``(D theta)_i = theta_i - theta_{i+1}``."""
    th = np.asarray(theta, dtype=np.float64)
    if th.ndim != 1 or th.size < 2:
        raise DimensionError("difference operator needs a vector of length >= 2")
    return _freeze(th[:-1] - th[1:])


def changepoints_of(theta, tol: float = DEFAULT_CP_TOL) -> tuple[int, ...]:
    """Indices ``i`` (1-based) with ``|theta_i - theta_{i+1}| > tol``."""
    th = np.asarray(theta, dtype=np.float64)
    if th.size < 2:
        return ()
    jumps = np.abs(th[:-1] - th[1:])
    return tuple(int(i) + 1 for i in np.flatnonzero(jumps > tol))
