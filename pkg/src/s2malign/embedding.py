"""Time-delay embedding with edge replication at the boundaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_series


@dataclass(frozen=True)
class EmbeddingConfig:
    past: int = 20
    future: int = 20

    def __post_init__(self):
        if self.past < 0 or self.future < 0:
            raise ValueError(f"past/future must be nonnegative, got {self.past}/{self.future}")

    @property
    def dim(self) -> int:
        return self.past + self.future + 1

    def sort_key(self):
        return (self.dim, self.past)


@dataclass(frozen=True)
class EmbeddedSeries:
    vectors: np.ndarray  # (N, M)
    config: EmbeddingConfig

    def __len__(self):
        return self.vectors.shape[0]


def embed(series, config: EmbeddingConfig) -> EmbeddedSeries:
    """Row ``k`` is ``series[k - past : k + future + 1]``, clamped to the series ends."""
    x = as_series(series)
    n = len(x)
    idx = np.arange(n)[:, None] + np.arange(-config.past, config.future + 1)[None, :]
    np.clip(idx, 0, n - 1, out=idx)
    return EmbeddedSeries(x[idx], config)
