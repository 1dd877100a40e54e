"""Training, test-time alignment, the plain-DTW baseline and evaluation."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cca import DEFAULT_RIDGE, CovarianceSet, LatentMap, accumulate_covariances, fit_cca, project
from .core import (
    AlignedModel,
    Model,
    align_model,
    as_series,
    model_length_samples,
    model_marker_samples,
)
from .datagen import BenchmarkConfig, GeneratedCase, gen_benchmark
from .dtw import DtwConfig, dtw_align
from .embedding import EmbeddingConfig, embed
from .synthesis import Template, extract_template, synthesize_binary, synthesize_replication

log = logging.getLogger(__name__)

SYNTHESES = ("binary", "replication")
METHODS = ("dtw_baseline", "cca_dtw")
DEFAULT_CANDIDATES = tuple(EmbeddingConfig(h, h) for h in (0, 5, 10, 20, 40))
DEFAULT_FOLDS = 5
LENGTH_SLACK = 1.05


@dataclass(frozen=True)
class TrainConfig:
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    ridge: float = DEFAULT_RIDGE
    synthesis: str = "replication"
    template: Template | None = None

    def __post_init__(self):
        if self.synthesis not in SYNTHESES:
            raise ValueError(f"unknown synthesis {self.synthesis!r}")
        if (self.synthesis == "replication") != (self.template is not None):
            raise ValueError("a template is required for replication synthesis and only for it")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")


@dataclass(frozen=True)
class TrainedModel:
    latent: LatentMap
    train_config: TrainConfig


@dataclass(frozen=True)
class EvalReport:
    per_series_errors: tuple[float, ...]
    mean_error: float
    method: str

    @classmethod
    def from_errors(cls, errors: Iterable[float], method: str) -> "EvalReport":
        errs = tuple(float(e) for e in errors)
        return cls(errs, float(np.mean(errs)) if errs else 0.0, method)


def synthesize(markers, length: int, synthesis: str, template: Template | None = None) -> np.ndarray:
    if synthesis == "binary":
        return synthesize_binary(markers, length)
    if synthesis == "replication":
        if template is None:
            raise ValueError("replication synthesis needs a template")
        return synthesize_replication(markers, template, length)
    raise ValueError(f"unknown synthesis {synthesis!r}")


def _as_item(item):
    if isinstance(item, GeneratedCase):
        return item.series, item.truth, item.blueprint
    x, truth, blueprint = item
    return x, truth, blueprint


def train(training_set: Sequence, config: TrainConfig) -> TrainedModel:
    """Learn the latent map from measured series and their ground-truth markers.

    Each synthesized reference is built at the ground-truth sample positions,
    so it is aligned with its measured series by construction.
    """
    covs = training_covariances(training_set, config)
    return TrainedModel(fit_cca(covs, config.embedding), config)


def training_covariances(training_set: Sequence, config: TrainConfig) -> CovarianceSet:
    if not training_set:
        raise ValueError("empty training set")
    pairs = []
    for item in training_set:
        x, truth, _ = _as_item(item)
        x = as_series(x)
        y = synthesize(truth, len(x), config.synthesis, config.template)
        pairs.append((embed(x, config.embedding), embed(y, config.embedding)))
    return accumulate_covariances(pairs, config.ridge)


def _locate(x_feat, y_feat, blueprint: Model, dtw: DtwConfig | None):
    alignment = dtw_align(x_feat, y_feat, dtw)
    return align_model(alignment, model_marker_samples(blueprint)), alignment


def reference_series(blueprint: Model, synthesis: str, template: Template | None) -> np.ndarray:
    """Series synthesized at the blueprint's theoretical positions."""
    length = model_length_samples(blueprint, LENGTH_SLACK)
    return synthesize(blueprint, length, synthesis, template)


def align_test(
    series,
    blueprint: Model,
    trained: TrainedModel,
    dtw: DtwConfig | None = None,
    with_alignment: bool = False,
):
    """Locate the blueprint markers in ``series`` through the latent space."""
    x = as_series(series)
    cfg = trained.train_config
    latent = trained.latent
    if latent.w_x.shape[0] != latent.embedding.dim:
        raise ValueError("latent map does not match its embedding")
    y = reference_series(blueprint, cfg.synthesis, cfg.template)
    xl = project(embed(x, latent.embedding), latent.w_x)
    yl = project(embed(y, latent.embedding), latent.w_y)
    aligned, alignment = _locate(xl, yl, blueprint, dtw)
    return (aligned, alignment) if with_alignment else aligned


def align_baseline(
    series,
    blueprint: Model,
    synthesis: str = "replication",
    template: Template | None = None,
    dtw: DtwConfig | None = None,
    with_alignment: bool = False,
):
    """Plain DTW between the raw series and the raw synthesized reference."""
    x = as_series(series)
    y = reference_series(blueprint, synthesis, template)
    aligned, alignment = _locate(x, y, blueprint, dtw)
    return (aligned, alignment) if with_alignment else aligned


def localization_error(estimated: AlignedModel, truth: AlignedModel) -> float:
    """Mean absolute start and end offset in samples, pooled over markers."""
    if len(estimated) != len(truth):
        raise ValueError(f"marker count mismatch: {len(estimated)} vs {len(truth)}")
    if len(truth) == 0:
        return 0.0
    diffs = np.concatenate(
        [np.abs(estimated.starts() - truth.starts()), np.abs(estimated.ends() - truth.ends())]
    )
    return float(diffs.mean())


def _map(fn, items, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def evaluate(
    cases: Sequence,
    method: str,
    trained: TrainedModel | None = None,
    synthesis: str = "replication",
    template: Template | None = None,
    workers: int = 1,
) -> EvalReport:
    if method == "cca_dtw":
        if trained is None:
            raise ValueError("cca_dtw evaluation needs a trained model")

        def one(item):
            x, truth, bp = _as_item(item)
            return localization_error(align_test(x, bp, trained), truth)

    elif method == "dtw_baseline":

        def one(item):
            x, truth, bp = _as_item(item)
            return localization_error(align_baseline(x, bp, synthesis, template), truth)

    else:
        raise ValueError(f"unknown method {method!r}")
    return EvalReport.from_errors(_map(one, cases, workers), method)


def cv_scores(
    training_set: Sequence,
    candidates: Sequence[EmbeddingConfig],
    folds: int = DEFAULT_FOLDS,
    ridge: float = DEFAULT_RIDGE,
    synthesis: str = "replication",
    template: Template | None = None,
    workers: int = 1,
) -> list[float]:
    """Held-out mean localization error per candidate (round-robin folds)."""
    if not candidates:
        raise ValueError("no embedding candidates")
    if folds < 2:
        raise ValueError("need at least two folds")
    if folds > len(training_set):
        raise ValueError(f"{folds} folds exceed training set of size {len(training_set)}")
    parts = [[training_set[i] for i in range(f, len(training_set), folds)] for f in range(folds)]
    scores = []
    for cand in candidates:
        cfg = TrainConfig(cand, ridge, synthesis, template)
        errors = []
        for f in range(folds):
            fit_on = [it for g in range(folds) if g != f for it in parts[g]]
            trained = train(fit_on, cfg)
            errors.extend(evaluate(parts[f], "cca_dtw", trained, workers=workers).per_series_errors)
        scores.append(float(np.mean(errors)))
        log.debug("cv %s -> %.4f", cand, scores[-1])
    return scores


def cross_validate_embedding(
    training_set: Sequence,
    candidates: Sequence[EmbeddingConfig] = DEFAULT_CANDIDATES,
    folds: int = DEFAULT_FOLDS,
    ridge: float = DEFAULT_RIDGE,
    synthesis: str = "replication",
    template: Template | None = None,
    workers: int = 1,
) -> EmbeddingConfig:
    """Candidate with the lowest held-out error; ties go to smaller M, then smaller past."""
    if not candidates:
        raise ValueError("no embedding candidates")
    if len(candidates) == 1:
        return candidates[0]
    scores = cv_scores(training_set, candidates, folds, ridge, synthesis, template, workers)
    best = min(range(len(candidates)), key=lambda k: (scores[k], candidates[k].sort_key()))
    return candidates[best]


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)  # (noise_rate, method, series_id, error)
    summary: list = field(default_factory=list)  # dicts per (noise_rate, method)

    def mean_error(self, rate: float, method: str) -> float:
        for s in self.summary:
            if s["noise_rate"] == rate and s["method"] == method:
                return s["mean_error"]
        raise KeyError((rate, method))


def benchmark_template(case: GeneratedCase, marker_index: int = 0) -> Template:
    """Pattern cut from the noise-free version of a training case."""
    return extract_template(case.clean, case.truth, marker_index)


def noise_sweep(
    config: BenchmarkConfig,
    rates: Sequence[float],
    train_ids: Sequence[int] | None = None,
    test_ids: Sequence[int] | None = None,
    candidates: Sequence[EmbeddingConfig] = DEFAULT_CANDIDATES,
    folds: int = DEFAULT_FOLDS,
    ridge: float = DEFAULT_RIDGE,
    synthesis: str = "replication",
    workers: int = 1,
) -> SweepResult:
    """Baseline and latent-space errors on the test pool, for each noise rate.

    The pools are regenerated at every rate from the same seed, so only the
    noise changes. Replication synthesis uses the first marker of the first
    training case, cut from its noise-free signal.
    """
    train_ids = list(config.train_ids if train_ids is None else train_ids)
    test_ids = list(config.test_ids if test_ids is None else test_ids)
    if not train_ids or not test_ids:
        raise ValueError("train and test pools must be nonempty")
    out = SweepResult()
    for rate in rates:
        if not 0 <= rate <= 1:
            raise ValueError(f"noise rate {rate} outside [0, 1]")
        cfg = config.with_(noise_rate=float(rate))
        train_cases = gen_benchmark(cfg, train_ids)
        test_cases = gen_benchmark(cfg, test_ids)
        template = benchmark_template(train_cases[0]) if synthesis == "replication" else None
        emb = cross_validate_embedding(
            train_cases, candidates, folds, ridge, synthesis, template, workers
        )
        trained = train(train_cases, TrainConfig(emb, ridge, synthesis, template))
        reports = {
            "dtw_baseline": evaluate(test_cases, "dtw_baseline", synthesis=synthesis,
                                     template=template, workers=workers),
            "cca_dtw": evaluate(test_cases, "cca_dtw", trained, workers=workers),
        }
        for method in METHODS:
            rep = reports[method]
            for cid, err in zip(test_ids, rep.per_series_errors):
                out.rows.append((float(rate), method, cid, err))
            out.summary.append(
                {
                    "noise_rate": float(rate),
                    "method": method,
                    "mean_error": rep.mean_error,
                    "n_series": len(rep.per_series_errors),
                    "past": emb.past,
                    "future": emb.future,
                    "rho": trained.latent.rho,
                }
            )
        log.info(
            "rate %.2f: dtw %.3f, cca+dtw %.3f (past=%d future=%d)",
            rate, reports["dtw_baseline"].mean_error, reports["cca_dtw"].mean_error,
            emb.past, emb.future,
        )
    return out
