"""Alignment operators between a length-``n`` target grid and finer source grids.

Everything is matrix-free. Block ``j`` (1-based) of the expansion to length
``m`` covers rows ``ceil((j-1)m/n)+1 .. ceil(jm/n)``; averaging takes the mean
over the same blocks. The multi-block variants concatenate one such block per
length in ``block_lens`` for every target coordinate.

Block means are computed in centered form (block head plus mean deviation) so
that averaging a block of identical values returns that value bit-for-bit.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .exceptions import DimensionError
from .signal import SourceDataset, _freeze

__all__ = [
    "block_bounds",
    "multi_block_bounds",
    "expand",
    "average",
    "expand_multi",
    "average_multi",
    "interleave_pair",
    "interleave_all",
    "expansion_matrix",
    "averaging_matrix",
]


def _ceil_div(a: np.ndarray, b: int) -> np.ndarray:
    return -(-a // b)


def block_bounds(n: int, m: int) -> np.ndarray:
    """Return ``[ceil(i*m/n) for i in 0..n]`` using exact integer arithmetic."""
    if n < 1 or m < 1:
        raise DimensionError(f"lengths must be positive, got n={n}, m={m}")
    i = np.arange(n + 1, dtype=np.int64)
    return _ceil_div(i * int(m), int(n))


def multi_block_bounds(n: int, block_lens: Sequence[int]) -> np.ndarray:
    """Return ``[sum_k ceil(i*m_k/n) for i in 0..n]``."""
    lens = [int(m) for m in block_lens]
    if not lens:
        raise DimensionError("block_lens must be nonempty")
    if n < 1 or min(lens) < 1:
        raise DimensionError(f"lengths must be positive, got n={n}, blocks={lens}")
    total = np.zeros(n + 1, dtype=np.int64)
    for m in lens:
        total += block_bounds(n, m)
    return total


def _expand_with(v: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    return _freeze(np.repeat(v, np.diff(bounds)))


def _average_with(v: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    starts = bounds[:-1]
    widths = np.diff(bounds)
    ref = v[starts]
    dev = v - np.repeat(ref, widths)
    return _freeze(ref + np.add.reduceat(dev, starts) / widths)


def _as_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"{name} must be a nonempty 1-D vector")
    return arr


def expand(v, m: int) -> np.ndarray:
    """Apply the expansion operator: replicate each ``v_j`` over its block.

    For ``m < len(v)`` the same row-selection rule applies and some
    coordinates of ``v`` are skipped.
    """
    v = _as_vector(v, "v")
    return _expand_with(v, block_bounds(v.size, m))


def average(v, n: int) -> np.ndarray:
    """Apply the averaging operator: block means of ``v`` onto ``n`` points.

    Left inverse of :func:`expand`, so ``average(expand(v, m), len(v)) == v``
    exactly for every ``m >= len(v)``.
    """
    v = _as_vector(v, "v")
    if v.size < n:
        raise DimensionError(f"averaging needs len(v) >= n, got {v.size} < {n}")
    return _average_with(v, block_bounds(n, v.size))


def expand_multi(v, block_lens: Sequence[int]) -> np.ndarray:
    v = _as_vector(v, "v")
    return _expand_with(v, multi_block_bounds(v.size, block_lens))


def average_multi(v, n: int, block_lens: Sequence[int]) -> np.ndarray:
    """Multi-block averaging; block ``i`` spans all per-length sub-blocks ``i``."""
    v = _as_vector(v, "v")
    lens = [int(m) for m in block_lens]
    if lens and max(lens) < n:
        raise DimensionError(f"need max(block_lens) >= n, got {max(lens)} < {n}")
    bounds = multi_block_bounds(n, lens)
    if v.size != bounds[-1]:
        raise DimensionError(f"len(v)={v.size} but block_lens sum to {bounds[-1]}")
    return _average_with(v, bounds)


def interleave_pair(y, y1) -> np.ndarray:
    """Merge target ``y`` into source ``y1``: ``y_j`` sits at ``ceil(j*n1/n0) + j``.

    Source entries fill the remaining positions in order, so each target
    value closes the block of source values that expand onto it.
    """
    y = _as_vector(y, "y")
    y1 = np.asarray(y1, dtype=np.float64).ravel()
    n0, n1 = y.size, y1.size
    j = np.arange(1, n0 + 1, dtype=np.int64)
    pos = _ceil_div(j * n1, n0) + j - 1
    out = np.empty(n0 + n1)
    mask = np.zeros(n0 + n1, dtype=bool)
    mask[pos] = True
    out[mask] = y
    out[~mask] = y1
    return _freeze(out)


def interleave_all(y, sources: Sequence[SourceDataset]) -> np.ndarray:
    """Build the combined target-plus-sources vector grouped by target index.

    For every target index ``j`` the group holds ``y_j`` followed by the
    block of each source (in list order) that expands onto ``j``.
    """
    y = _as_vector(y, "y")
    if len(sources) == 0:
        raise ValueError("interleave_all needs at least one source")
    n0 = y.size
    lens = [n0] + [s.n for s in sources]
    bounds = [block_bounds(n0, m) for m in lens]
    # offsets[k][j-1]: sum_{l<k} ceil(j n_l/n0) + sum_{l>=k} ceil((j-1) n_l/n0)
    lower = np.sum([b[:-1] for b in bounds], axis=0)
    out = np.empty(int(sum(lens)))
    out[lower] = y
    offset = lower + np.diff(bounds[0])
    for src, b in zip(sources, bounds[1:]):
        widths = np.diff(b)
        group = np.repeat(np.arange(n0), widths)
        t = np.arange(src.n)
        out[offset[group] + (t - b[:-1][group])] = src.data
        offset = offset + widths
    return _freeze(out)


def expansion_matrix(n: int, m: int) -> np.ndarray:
    """Dense ``m x n`` expansion matrix (for testing and small problems)."""
    b = block_bounds(n, m)
    rows = np.arange(m)[:, None]
    return ((rows >= b[None, :-1]) & (rows < b[None, 1:])).astype(float)


def averaging_matrix(n: int, m: int) -> np.ndarray:
    """Dense ``n x m`` averaging matrix, ``m >= n``."""
    if m < n:
        raise DimensionError(f"averaging matrix needs m >= n, got {m} < {n}")
    b = block_bounds(n, m)
    cols = np.arange(m)[None, :]
    ind = (cols >= b[:-1, None]) & (cols < b[1:, None])
    return ind / np.diff(b)[:, None]
