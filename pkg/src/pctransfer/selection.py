"""Informative source detection, its tuning rules and subset refinement."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .alignment import expand
from .exceptions import DimensionError
from .signal import SourceDataset, as_signal

__all__ = [
    "SelectionConfig",
    "deviation",
    "screened_statistic",
    "source_statistics",
    "detect_informative",
    "theoretical_screen_width",
    "theoretical_threshold",
    "refine_subset",
    "refine_objective",
    "frequency_curve",
    "REFINE_CAP",
]

REFINE_CAP = 20

InformativeSet = tuple  # sorted tuple of 1-based source indices


@dataclass(frozen=True)
class SelectionConfig:
    """Per-source screening widths and thresholds, in source-list order."""

    screen_widths: tuple
    thresholds: tuple

    def __post_init__(self):
        widths = tuple(int(t) for t in self.screen_widths)
        taus = tuple(float(t) for t in self.thresholds)
        if len(widths) != len(taus):
            raise ValueError("need one (width, threshold) pair per source")
        if any(t < 1 for t in widths):
            raise ValueError("screening widths must be >= 1")
        # zero is allowed (noiseless permutation residuals give tau = 0);
        # +inf keeps every source
        if any(not (t >= 0) for t in taus):
            raise ValueError("thresholds must be >= 0 and not NaN")
        object.__setattr__(self, "screen_widths", widths)
        object.__setattr__(self, "thresholds", taus)

    @classmethod
    def uniform(cls, k: int, width: int, tau: float) -> "SelectionConfig":
        return cls((width,) * k, (tau,) * k)


def deviation(y, source_data) -> np.ndarray:
    """Normalised deviation ``n_k^{-1/2} (y_k - expand(y, n_k))``."""
    yk = np.asarray(source_data, dtype=np.float64)
    return (yk - expand(y, yk.size)) / math.sqrt(yk.size)


def screened_statistic(delta: np.ndarray, width: int) -> float:
    """Sum of squares of the ``width`` largest-magnitude entries.

    Ties at the cut are resolved towards lower indices.
    """
    width = min(int(width), delta.size)
    order = np.argsort(-np.abs(delta), kind="stable")[:width]
    top = delta[order]
    return float(np.dot(top, top))


def source_statistics(y, sources: Sequence[SourceDataset], widths: Sequence[int]) -> np.ndarray:
    """Screened statistic of every source, in list order."""
    y = as_signal(y, "target")
    if len(widths) != len(sources):
        raise ValueError(f"{len(widths)} screening widths for {len(sources)} sources")
    for t, s in zip(widths, sources):
        if not 1 <= int(t) <= s.n:
            raise ValueError(f"screening width {t} outside [1, {s.n}] for source {s.index}")
    return np.array(
        [screened_statistic(deviation(y, s.data), t) for s, t in zip(sources, widths)]
    )


def detect_informative(
    y, sources: Sequence[SourceDataset], config: SelectionConfig
) -> InformativeSet:
    """Return the indices of sources whose screened deviation is within threshold.

    For each source ``k`` the normalised deviation from the expanded target is
    screened down to its ``t_k`` largest entries; ``k`` is kept iff their
    squared norm is at most ``tau_k``. The result may be empty.
    """
    if len(config.thresholds) != len(sources):
        raise ValueError(
            f"config has {len(config.thresholds)} entries for {len(sources)} sources"
        )
    stats = source_statistics(y, sources, config.screen_widths)
    keep = [s.index for s, stat, tau in zip(sources, stats, config.thresholds) if stat <= tau]
    return tuple(sorted(keep))


def _log_max(n0: int, nk: int) -> float:
    return math.log(max(n0, nk))


def theoretical_screen_width(s0: int, n0: int, nk: int, c: float = 1.0) -> int:
    """Rounded-up theoretical screening width, clamped into ``[1, nk]``."""
    if s0 < 0 or n0 < 1 or nk < 1 or c <= 0:
        raise ValueError("need s0 >= 0, n0, nk >= 1 and c > 0")
    lm = _log_max(n0, nk)
    if lm == 0.0:
        return int(nk)
    rate = (s0 + 1) * (1.0 + math.log(n0 / (s0 + 1)))
    raw = c * nk / (8.0 * n0) * (rate / lm + 1.0)
    return int(min(max(math.ceil(raw), 1), nk))


def theoretical_threshold(s0: int, n0: int, nk: int, c: float = 1.0) -> float:
    if s0 < 0 or n0 < 1 or nk < 1 or c <= 0:
        raise ValueError("need s0 >= 0, n0, nk >= 1 and c > 0")
    rate = (s0 + 1) * (1.0 + math.log(n0 / (s0 + 1)))
    return c * (rate + _log_max(n0, nk)) / n0


def _lens_lookup(source_lens: Union[Mapping[int, int], Sequence[int]]) -> Mapping[int, int]:
    if isinstance(source_lens, Mapping):
        return {int(k): int(v) for k, v in source_lens.items()}
    return {i + 1: int(v) for i, v in enumerate(source_lens)}


def refine_objective(subset, source_lens) -> float:
    """``sum_{k in subset} 1/n_k / |subset|^2``; smaller means less fluctuation."""
    lens = _lens_lookup(source_lens)
    return sum(1.0 / lens[k] for k in subset) / len(subset) ** 2


def refine_subset(a_hat, source_lens, cap: int = REFINE_CAP) -> InformativeSet:
    """Exhaustively pick the nonempty subset minimising :func:`refine_objective`.

    ``source_lens`` maps 1-based source index to length (a sequence is read
    as lengths of sources 1, 2, ...). Ties prefer larger subsets, then the
    lexicographically smallest.
    """
    members = sorted(int(k) for k in a_hat)
    if not members:
        raise ValueError("cannot refine an empty informative set")
    if len(members) > cap:
        raise ValueError(
            f"informative set has {len(members)} members, exhaustive search is capped "
            f"at {cap}; greedy refinement is not provided"
        )
    lens = _lens_lookup(source_lens)
    missing = [k for k in members if k not in lens]
    if missing:
        raise DimensionError(f"no length given for sources {missing}")
    inv = {k: 1.0 / lens[k] for k in members}
    best_key = None
    best = None
    for size in range(len(members), 0, -1):
        for combo in itertools.combinations(members, size):
            val = sum(inv[k] for k in combo) / size**2
            key = (val, -size)
            if best_key is None or key < best_key:
                best_key, best = key, combo
    return tuple(best)


def frequency_curve(source_lens: Sequence[int], k: int) -> float:
    """``K^2 / sum_{k<=K} 1/n_k``: K times the harmonic mean of the first K lengths."""
    lens = [int(m) for m in source_lens]
    if not 1 <= k <= len(lens):
        raise ValueError(f"K must lie in [1, {len(lens)}], got {k}")
    return k * k / sum(1.0 / m for m in lens[:k])
