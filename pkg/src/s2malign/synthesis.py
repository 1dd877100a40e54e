"""Reference series synthesis from a blueprint (binary and replication)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AlignedModel, Model, as_series, model_marker_samples


@dataclass(frozen=True)
class Template:
    """A pattern waveform to be pasted at marker positions."""

    values: np.ndarray
    class_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", as_series(self.values, "template"))


def _marker_samples(markers) -> list[tuple[int, int, int]]:
    if isinstance(markers, Model):
        return model_marker_samples(markers)
    if isinstance(markers, AlignedModel):
        return list(markers.markers_in_samples)
    return [(int(m[0]), int(m[1]), int(m[2]) if len(m) > 2 else 0) for m in markers]


def _check_range(marks, length):
    if length < 1:
        raise ValueError(f"length must be positive, got {length}")
    for k, (s, e, _) in enumerate(marks):
        if s < 0 or e >= length:
            raise ValueError(f"marker {k} ({s}, {e}) exceeds series length {length}")


def resample_linear(values: np.ndarray, width: int) -> np.ndarray:
    """Linearly resample ``values`` onto ``width`` equispaced points spanning it."""
    values = np.asarray(values, dtype=float)
    if width == len(values):
        return values.copy()
    if len(values) == 1:
        return np.full(width, values[0])
    if width == 1:
        return values[:1].copy()
    src = np.linspace(0.0, 1.0, len(values))
    dst = np.linspace(0.0, 1.0, width)
    return np.interp(dst, src, values)


def synthesize_binary(markers, length_samples: int) -> np.ndarray:
    """1 on every marker range ``[start, end]`` (inclusive), 0 elsewhere.

    ``markers`` is a :class:`Model` (converted at its theoretical sample
    positions), an :class:`AlignedModel`, or ``(start, end[, class])`` sample triples.
    """
    marks = _marker_samples(markers)
    _check_range(marks, length_samples)
    out = np.zeros(length_samples)
    for s, e, _ in marks:
        out[s : e + 1] = 1.0
    return out


def synthesize_replication(markers, template: Template, length_samples: int) -> np.ndarray:
    """Paste ``template``, resampled to each marker's width, over a zero background."""
    marks = _marker_samples(markers)
    _check_range(marks, length_samples)
    out = np.zeros(length_samples)
    for s, e, _ in marks:
        out[s : e + 1] = resample_linear(template.values, e - s + 1)
    return out


def extract_template(series, aligned_model: AlignedModel, marker_index: int) -> Template:
    x = as_series(series)
    marks = aligned_model.markers_in_samples
    if not 0 <= marker_index < len(marks):
        raise IndexError(f"marker index {marker_index} out of range for {len(marks)} markers")
    s, e, c = marks[marker_index]
    if s < 0 or e >= len(x) or s > e:
        raise IndexError(f"marker ({s}, {e}) outside series of length {len(x)}")
    return Template(x[s : e + 1].copy(), c)
