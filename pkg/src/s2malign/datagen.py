"""Seeded synthetic benchmark: bump patterns on a blueprint, warped, plus sine noise.

Random numbers come from numpy's Philox-4x64 counter-based generator (10
rounds). Case ``i`` of a benchmark with seed ``s`` uses the 128-bit key
``(s mod 2**64) + i * 2**64`` with a zero counter, and draws, in this order:

1. ``n_markers`` pattern widths, ``Generator.integers(wmin, wmax + 1)``
2. ``n_markers`` gaps preceding each marker, ``Generator.integers(gmin, gmax + 1)``
3. one amplitude factor per marker, ``Generator.uniform(-1, 1)``
4. the noise phase, ``Generator.uniform(0, 2 pi)``

The draws do not depend on ``noise_rate``, ``warp_strength`` or
``pattern_jitter``, so changing those keeps the same layout. This scheme is
frozen: changing it changes every shipped benchmark.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .core import AlignedModel, Marker, Model, model_length_samples, round_half_up
from .synthesis import Template


TAPER = 0.4


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BenchmarkConfig:
    n_series: int = 198
    n_markers_per_series: int = 10
    pattern_width_samples: tuple[int, int] = (24, 40)
    spacing_samples: tuple[int, int] = (40, 120)
    noise_rate: float = 0.0
    noise_period_samples: float = 96.0
    warp_strength: float = 0.05
    pattern_jitter: float = 0.2
    seed: int = 20190512
    samples_per_unit: float = 2.0
    n_train: int = 19

    def __post_init__(self):
        object.__setattr__(self, "pattern_width_samples", tuple(self.pattern_width_samples))
        object.__setattr__(self, "spacing_samples", tuple(self.spacing_samples))
        problems = self.problems()
        if problems:
            raise ConfigError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if self.n_series < 1:
            out.append("n_series must be positive")
        if self.n_markers_per_series < 1:
            out.append("n_markers_per_series must be positive")
        wmin, wmax = self.pattern_width_samples
        if not 3 <= wmin <= wmax:
            out.append("pattern_width_samples must satisfy 3 <= min <= max")
        gmin, gmax = self.spacing_samples
        if not 2 <= gmin <= gmax:
            out.append("spacing_samples must satisfy 2 <= min <= max")
        if not 0 <= self.noise_rate <= 1:
            out.append("noise_rate must lie in [0, 1]")
        if not self.noise_period_samples > 0:
            out.append("noise_period_samples must be positive")
        if not 0 <= self.warp_strength < 0.5:
            out.append("warp_strength must lie in [0, 0.5)")
        if not 0 <= self.pattern_jitter < 1:
            out.append("pattern_jitter must lie in [0, 1)")
        if not self.samples_per_unit > 0:
            out.append("samples_per_unit must be positive")
        if not 0 <= self.n_train <= self.n_series:
            out.append("n_train must lie in [0, n_series]")
        if not 0 <= self.seed < 2**64:
            out.append("seed must be a nonnegative 64-bit integer")
        return out

    @property
    def train_ids(self) -> list[int]:
        return list(range(self.n_train))

    @property
    def test_ids(self) -> list[int]:
        return list(range(self.n_train, self.n_series))

    def to_json(self) -> dict:
        d = asdict(self)
        d["pattern_width_samples"] = list(self.pattern_width_samples)
        d["spacing_samples"] = list(self.spacing_samples)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "BenchmarkConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown benchmark config keys: {sorted(unknown)}")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def with_(self, **changes) -> "BenchmarkConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class GeneratedCase:
    series: np.ndarray
    truth: AlignedModel
    blueprint: Model
    clean: np.ndarray = field(repr=False, default=None)
    index: int = 0


def case_rng(seed: int, case_index: int) -> np.random.Generator:
    key = (int(seed) % 2**64) + (int(case_index) << 64)
    return np.random.Generator(np.random.Philox(key=key, counter=0))


def gen_template(width: int, rng: np.random.Generator | None = None, jitter: float = 0.0) -> Template:
    """Truncated raised-cosine bump, peak 1, scaled by ``1 + jitter * u``.

    Sample ``k`` is ``(1 + cos(pi * TAPER * x_k)) / 2`` with ``x_k`` equispaced on
    ``[-1, 1]``, so the end samples sit at about 0.65 of the peak and the pattern
    edges are steps out of the zero background. Even widths are rescaled to peak 1.
    ``u`` is drawn from ``rng`` whenever ``rng`` is given, even with zero jitter.
    """
    if width < 3:
        raise ValueError(f"template width must be at least 3, got {width}")
    x = np.linspace(-1.0, 1.0, width)
    bump = 0.5 * (1.0 + np.cos(np.pi * TAPER * x))
    bump /= bump.max()
    u = rng.uniform(-1.0, 1.0) if rng is not None else 0.0
    return Template(bump * (1.0 + jitter * u))


def warp_map(t, length: int, strength: float):
    """Forward warp ``t -> t + strength * L * sin(2 pi t / L) / (2 pi)``."""
    t = np.asarray(t, dtype=float)
    return t + strength * length * np.sin(2 * np.pi * t / length) / (2 * np.pi)


def inverse_warp_map(u, length: int, strength: float) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    t = u.copy()
    if strength == 0:
        return t
    w = 2 * np.pi / length
    for _ in range(100):
        f = warp_map(t, length, strength) - u
        step = f / (1.0 + strength * np.cos(w * t))
        t -= step
        if np.max(np.abs(step)) < 1e-12:
            break
    return t


def gen_case(config: BenchmarkConfig, case_index: int) -> GeneratedCase:
    rng = case_rng(config.seed, case_index)
    n = config.n_markers_per_series
    wmin, wmax = config.pattern_width_samples
    gmin, gmax = config.spacing_samples
    widths = rng.integers(wmin, wmax + 1, size=n)
    gaps = rng.integers(gmin, gmax + 1, size=n)
    templates = [gen_template(int(w), rng, config.pattern_jitter) for w in widths]
    phase = rng.uniform(0.0, 2 * np.pi)

    spu = config.samples_per_unit
    starts = []
    pos = 0
    for w, g in zip(widths, gaps):
        pos += int(g)
        starts.append(pos)
        pos += int(w)
    marks = [(s, s + int(w) - 1) for s, w in zip(starts, widths)]
    blueprint = Model(tuple(Marker(s / spu, e / spu, 0) for s, e in marks), spu)
    length = model_length_samples(blueprint)

    clean = np.zeros(length)
    for (s, e), tpl in zip(marks, templates):
        clean[s : e + 1] = tpl.values

    if config.warp_strength > 0:
        src = inverse_warp_map(np.arange(length), length, config.warp_strength)
        clean = np.interp(src, np.arange(length), clean)
        truth = [
            (round_half_up(float(warp_map(s, length, config.warp_strength))),
             round_half_up(float(warp_map(e, length, config.warp_strength))), 0)
            for s, e in marks
        ]
    else:
        truth = [(s, e, 0) for s, e in marks]

    amp = config.noise_rate * float(np.max(np.abs(clean)))
    k = np.arange(length)
    noise = amp * np.sin(2 * np.pi * k / config.noise_period_samples + phase)
    series = clean + noise
    return GeneratedCase(series, AlignedModel(tuple(truth)), blueprint, clean, case_index)


def gen_benchmark(config: BenchmarkConfig, indices=None) -> list[GeneratedCase]:
    if indices is None:
        indices = range(config.n_series)
    return [gen_case(config, i) for i in indices]


def noise_amplitude(config: BenchmarkConfig, case: GeneratedCase) -> float:
    return config.noise_rate * float(np.max(np.abs(case.clean)))


def max_warp_displacement(length: int, strength: float) -> float:
    return strength * length / (2 * math.pi)
