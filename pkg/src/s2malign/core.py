"""Domain types for blueprint models, series and alignments.

All indices are zero-based. A marker range ``[start, end]`` is inclusive on
both ends, in physical units on a :class:`Model` and in samples on an
:class:`AlignedModel`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class ModelError(ValueError):
    """Raised when a blueprint model violates its invariants."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class Marker:
    start: float
    end: float
    class_id: int = 0


@dataclass(frozen=True)
class Model:
    """Blueprint: markers in physical units plus a unit-to-sample scale."""

    markers: tuple[Marker, ...]
    samples_per_unit: float

    def __post_init__(self):
        object.__setattr__(self, "markers", tuple(self.markers))

    @classmethod
    def from_tuples(cls, markers: Iterable[Sequence[float]], samples_per_unit: float) -> "Model":
        ms = []
        for m in markers:
            ms.append(Marker(float(m[0]), float(m[1]), int(m[2]) if len(m) > 2 else 0))
        return cls(tuple(ms), float(samples_per_unit))

    @property
    def max_end(self) -> float:
        return max((m.end for m in self.markers), default=0.0)


@dataclass(frozen=True)
class AlignedModel:
    """Markers located in a concrete series, as integer sample indices."""

    markers_in_samples: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "markers_in_samples",
            tuple((int(s), int(e), int(c)) for s, e, c in self.markers_in_samples),
        )

    def __len__(self):
        return len(self.markers_in_samples)

    def starts(self) -> np.ndarray:
        return np.array([m[0] for m in self.markers_in_samples], dtype=np.int64)

    def ends(self) -> np.ndarray:
        return np.array([m[1] for m in self.markers_in_samples], dtype=np.int64)

    def check(self, n: int | None = None) -> list[str]:
        """Return violated invariants (empty when valid)."""
        problems = []
        prev = None
        for k, (s, e, _) in enumerate(self.markers_in_samples):
            if s > e:
                problems.append(f"start after end at index {k}")
            if prev is not None and s < prev:
                problems.append(f"decreasing start at index {k}")
            if s < 0 or (n is not None and e > n - 1):
                problems.append(f"out of range at index {k}")
            prev = s
        return problems


@dataclass(frozen=True)
class Alignment:
    """Warping path between series A (first index) and series B (second index)."""

    path: np.ndarray
    total_cost: float
    _first_i: np.ndarray = field(repr=False, compare=False, default=None)
    _last_i: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        path = np.asarray(self.path, dtype=np.int64).reshape(-1, 2)
        path.setflags(write=False)
        object.__setattr__(self, "path", path)
        # pairs sharing one j are contiguous in a monotone path
        nb = int(path[-1, 1]) + 1
        first = np.searchsorted(path[:, 1], np.arange(nb), side="left")
        last = np.searchsorted(path[:, 1], np.arange(nb), side="right") - 1
        object.__setattr__(self, "_first_i", path[first, 0])
        object.__setattr__(self, "_last_i", path[last, 0])

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.path[-1, 0]) + 1, int(self.path[-1, 1]) + 1

    def check(self) -> list[str]:
        problems = []
        p = self.path
        if tuple(p[0]) != (0, 0):
            problems.append("path does not start at (0, 0)")
        steps = np.diff(p, axis=0)
        ok = ((steps == [1, 0]) | (steps == [0, 1]) | (steps == [1, 1])).all(axis=1)
        if not ok.all():
            problems.append(f"invalid step at position {int(np.argmin(ok)) + 1}")
        if not (self.total_cost >= 0):
            problems.append("negative cost")
        return problems

    def to_json(self) -> dict:
        return {"cost": float(self.total_cost), "path": self.path.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "Alignment":
        return cls(np.asarray(obj["path"], dtype=np.int64), float(obj["cost"]))


def as_series(values, name: str = "series") -> np.ndarray:
    """Validate and convert to a 1-D float array (the TimeSeries contract)."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def validate_model(model: Model) -> list[str]:
    """Return every violated invariant; an empty list means the model is valid."""
    problems = []
    if not (model.samples_per_unit > 0):
        problems.append("nonpositive scale")
    prev = None
    for k, m in enumerate(model.markers):
        if not (math.isfinite(m.start) and math.isfinite(m.end)):
            problems.append(f"non-finite marker at index {k}")
        elif not m.start < m.end:
            problems.append(f"reversed start/end at index {k}")
        if prev is not None:
            if m.start < prev.start:
                problems.append(f"unsorted at index {k}")
            elif m.start < prev.end:
                problems.append(f"overlap at index {k}")
        prev = m
    return problems


def model_marker_samples(model: Model) -> list[tuple[int, int, int]]:
    problems = validate_model(model)
    if problems:
        raise ModelError(problems)
    sc = model.samples_per_unit
    return [
        (round_half_up(m.start * sc), round_half_up(m.end * sc), m.class_id) for m in model.markers
    ]


def model_length_samples(model: Model, slack: float = 1.05) -> int:
    """Length of a synthesized series covering the model, with room after the last marker."""
    last_end = max((e for _, e, _ in model_marker_samples(model)), default=0)
    return max(round_half_up(model.max_end * model.samples_per_unit * slack), last_end + 1)


def map_position(alignment: Alignment, j: int) -> int:
    """Index into series A matched to index ``j`` of series B.

    Many-to-one matches resolve to the lower median of the matched indices.
    """
    nb = alignment.shape[1]
    if not 0 <= j < nb:
        raise IndexError(f"j={j} outside series B of length {nb}")
    lo = int(alignment._first_i[j])
    hi = int(alignment._last_i[j])
    return lo + (hi - lo) // 2


def align_model(alignment: Alignment, markers_in_b) -> AlignedModel:
    """Carry marker sample positions in series B over to series A."""
    if isinstance(markers_in_b, AlignedModel):
        markers_in_b = markers_in_b.markers_in_samples
    nb = alignment.shape[1]
    out = []
    for k, (s, e, c) in enumerate(markers_in_b):
        if not (0 <= s < nb and 0 <= e < nb):
            raise IndexError(f"marker {k} ({s}, {e}) outside series B of length {nb}")
        ms = map_position(alignment, s)
        me = map_position(alignment, e)
        out.append((ms, max(ms, me), c))
    return AlignedModel(tuple(out))
