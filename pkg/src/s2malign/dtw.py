"""Dynamic time warping with full path backtracking.

Local cost is the squared difference and the step pattern is the symmetric
``{(1, 0), (0, 1), (1, 1)}`` set without weights. Backtracking resolves ties
diagonal first, then vertical (decrement the index into ``a``), then
horizontal (decrement the index into ``b``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .core import Alignment, as_series


@dataclass(frozen=True)
class DtwConfig:
    window: int | None = None  # Sakoe-Chiba half-width, |i - j| <= window


def local_cost(u: float, v: float) -> float:
    d = u - v
    return d * d


@numba.njit(cache=True, nogil=True)
def _accumulate(a, b, window):
    na = a.shape[0]
    nb = b.shape[0]
    acc = np.full((na, nb), np.inf)
    for i in range(na):
        j_lo = 0
        j_hi = nb
        if window >= 0:
            j_lo = max(0, i - window)
            j_hi = min(nb, i + window + 1)
        for j in range(j_lo, j_hi):
            d = a[i] - b[j]
            c = d * d
            if i == 0 and j == 0:
                acc[i, j] = c
                continue
            best = np.inf
            if i > 0 and j > 0:
                best = acc[i - 1, j - 1]
            if i > 0 and acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if j > 0 and acc[i, j - 1] < best:
                best = acc[i, j - 1]
            acc[i, j] = c + best
    return acc


@numba.njit(cache=True, nogil=True)
def _backtrack(acc):
    i = acc.shape[0] - 1
    j = acc.shape[1] - 1
    out = np.empty((i + j + 1, 2), dtype=np.int64)
    k = 0
    out[k, 0] = i
    out[k, 1] = j
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag = acc[i - 1, j - 1]
            up = acc[i - 1, j]
            left = acc[i, j - 1]
            if diag <= up and diag <= left:
                i -= 1
                j -= 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        k += 1
        out[k, 0] = i
        out[k, 1] = j
    return out[: k + 1][::-1].copy()


def cost_matrix(a, b, config: DtwConfig | None = None) -> np.ndarray:
    """Accumulated cost matrix (``inf`` outside the band)."""
    a = as_series(a, "a")
    b = as_series(b, "b")
    window = _window(len(a), len(b), config)
    return _accumulate(a, b, window)


def _window(na: int, nb: int, config: DtwConfig | None) -> int:
    if config is None or config.window is None:
        return -1
    if config.window < 0:
        raise ValueError(f"window must be nonnegative, got {config.window}")
    if config.window < abs(na - nb):
        raise ValueError(f"window {config.window} cannot connect series of lengths {na} and {nb}")
    return int(config.window)


def dtw_align(a, b, config: DtwConfig | None = None) -> Alignment:
    """Minimum-cost warping path between ``a`` and ``b``."""
    acc = cost_matrix(a, b, config)
    path = _backtrack(acc)
    return Alignment(path, float(acc[-1, -1]))


def path_cost(a, b, path) -> float:
    """Sum of local costs along ``path``, for re-checking an :class:`Alignment`."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p = np.asarray(path)
    d = a[p[:, 0]] - b[p[:, 1]]
    return float(np.sum(d * d))
