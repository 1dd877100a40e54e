"""Canonical correlation between embedded series pairs.

The learned projections map both the measured and the synthesized series to
a one-dimensional latent space in which they are maximally correlated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as la

from .embedding import EmbeddedSeries, EmbeddingConfig

DEFAULT_RIDGE = 1e-6


class CcaError(ValueError):
    pass


@dataclass(frozen=True)
class CovarianceSet:
    """Pooled covariances; ``Rxx`` and ``Ryy`` already carry the ridge term."""

    Rxx: np.ndarray
    Ryy: np.ndarray
    Rxy: np.ndarray
    sample_count: int
    ridge: float = 0.0
    embedding: EmbeddingConfig | None = None
    ridge_x: float = 0.0
    ridge_y: float = 0.0

    @property
    def dim(self) -> int:
        return self.Rxx.shape[0]


@dataclass(frozen=True)
class LatentMap:
    w_x: np.ndarray
    w_y: np.ndarray
    rho: float
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    ridge: float = DEFAULT_RIDGE

    def to_json(self) -> dict:
        return {
            "past": self.embedding.past,
            "future": self.embedding.future,
            "ridge": float(self.ridge),
            "rho": float(self.rho),
            "w_x": [float(v) for v in self.w_x],
            "w_y": [float(v) for v in self.w_y],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LatentMap":
        emb = EmbeddingConfig(int(obj["past"]), int(obj["future"]))
        w_x = np.asarray(obj["w_x"], dtype=float)
        w_y = np.asarray(obj["w_y"], dtype=float)
        if w_x.shape != (emb.dim,) or w_y.shape != (emb.dim,):
            raise CcaError(
                f"projection length {w_x.shape[0]}/{w_y.shape[0]} does not match embedding dim {emb.dim}"
            )
        return cls(w_x, w_y, float(obj["rho"]), emb, float(obj["ridge"]))


def _ridge_amount(cov: np.ndarray, ridge: float) -> float:
    # relative to the mean variance so the optimum is scale invariant
    scale = float(np.mean(np.diag(cov)))
    return ridge * (scale if scale > 0 else 1.0)


def accumulate_covariances(
    pairs: Sequence[tuple[EmbeddedSeries, EmbeddedSeries]], ridge: float = DEFAULT_RIDGE
) -> CovarianceSet:
    """Pool mean-centred covariances over all rows of all pairs.

    ``ridge`` is relative: ``ridge * mean(diag(R))`` is added to the diagonal of
    ``Rxx`` and ``Ryy`` separately (absolute ``ridge`` when that mean is zero).
    """
    if not pairs:
        raise CcaError("no training pairs")
    if ridge < 0:
        raise CcaError(f"ridge must be nonnegative, got {ridge}")
    config = pairs[0][0].config
    for k, (ex, ey) in enumerate(pairs):
        if ex.config != config or ey.config != config:
            raise CcaError(f"pair {k} uses a different embedding configuration")
        if len(ex) != len(ey):
            raise CcaError(f"pair {k} has mismatched lengths {len(ex)} and {len(ey)}")
    m = config.dim
    n = sum(len(ex) for ex, _ in pairs)
    if n < m:
        raise CcaError(f"{n} rows is fewer than the embedding dimension {m}")

    mx = sum(ex.vectors.sum(axis=0) for ex, _ in pairs) / n
    my = sum(ey.vectors.sum(axis=0) for _, ey in pairs) / n
    rxx = np.zeros((m, m))
    ryy = np.zeros((m, m))
    rxy = np.zeros((m, m))
    for ex, ey in pairs:
        cx = ex.vectors - mx
        cy = ey.vectors - my
        rxx += cx.T @ cx
        ryy += cy.T @ cy
        rxy += cx.T @ cy
    rxx /= n
    ryy /= n
    rxy /= n
    # exact symmetry
    rxx = 0.5 * (rxx + rxx.T)
    ryy = 0.5 * (ryy + ryy.T)
    lx = _ridge_amount(rxx, ridge)
    ly = _ridge_amount(ryy, ridge)
    rxx[np.diag_indices(m)] += lx
    ryy[np.diag_indices(m)] += ly
    return CovarianceSet(rxx, ryy, rxy, n, ridge, config, lx, ly)


def covariance_set(rxx, ryy, rxy, ridge: float = 0.0, sample_count: int = 1) -> CovarianceSet:
    """Build a :class:`CovarianceSet` directly from (unregularized) matrices."""
    rxx = np.array(rxx, dtype=float)
    ryy = np.array(ryy, dtype=float)
    rxy = np.array(rxy, dtype=float)
    lx = _ridge_amount(rxx, ridge)
    ly = _ridge_amount(ryy, ridge)
    rxx[np.diag_indices_from(rxx)] += lx
    ryy[np.diag_indices_from(ryy)] += ly
    return CovarianceSet(rxx, ryy, rxy, sample_count, ridge, None, lx, ly)


def _inverse_cholesky_transpose(c: np.ndarray, name: str) -> np.ndarray:
    try:
        low = la.cholesky(c, lower=True)
    except la.LinAlgError as exc:
        raise CcaError(f"{name} is singular; increase the ridge or check for degenerate data") from exc
    return la.solve_triangular(low, np.eye(c.shape[0]), lower=True).T


def fit_cca(covs: CovarianceSet, embedding: EmbeddingConfig | None = None) -> LatentMap:
    """Top canonical pair of ``covs``.

    With ``Rxx = Lx Lx^T`` and ``Ryy = Ly Ly^T``, the whitened cross-covariance
    ``K = Lx^-1 Rxy Ly^-T`` goes into the symmetric matrix ``[[0, K], [K^T, 0]]``
    whose top eigenpair is ``(rho, [u; v] / sqrt 2)``; then ``w_x = Lx^-T u`` and
    ``w_y = Ly^-T v``, so both variates have unit regularized variance.
    """
    m = covs.dim
    ix = _inverse_cholesky_transpose(covs.Rxx, "Rxx")  # Lx^-T
    iy = _inverse_cholesky_transpose(covs.Ryy, "Ryy")
    k = ix.T @ covs.Rxy @ iy
    block = np.zeros((2 * m, 2 * m))
    block[:m, m:] = k
    block[m:, :m] = k.T
    vals, vecs = la.eigh(block, subset_by_index=[2 * m - 1, 2 * m - 1])
    u = vecs[:m, 0]
    v = vecs[m:, 0]
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise CcaError("degenerate canonical pair")
    w_x = ix @ (u / nu)
    w_y = iy @ (v / nv)

    # objective may come out negative only through round-off
    rho = float(w_x @ covs.Rxy @ w_y)
    if rho < 0:
        w_y = -w_y
        rho = -rho
    rho = min(rho, 1.0)

    tol = 1e-12 * np.max(np.abs(w_x))
    lead = np.flatnonzero(np.abs(w_x) > tol)
    if lead.size and w_x[lead[0]] < 0:
        w_x, w_y = -w_x, -w_y

    emb = embedding or covs.embedding or EmbeddingConfig(0, m - 1)
    return LatentMap(w_x, w_y, rho, emb, covs.ridge)


def stationarity_residuals(covs: CovarianceSet, latent: LatentMap) -> tuple[float, float]:
    """Relative residuals of ``Rxy w_y = rho Rxx w_x`` and ``Rxy^T w_x = rho Ryy w_y``."""
    r1 = covs.Rxy @ latent.w_y - latent.rho * covs.Rxx @ latent.w_x
    r2 = covs.Rxy.T @ latent.w_x - latent.rho * covs.Ryy @ latent.w_y
    d1 = max(np.linalg.norm(covs.Rxx @ latent.w_x), np.linalg.norm(covs.Rxy @ latent.w_y))
    d2 = max(np.linalg.norm(covs.Ryy @ latent.w_y), np.linalg.norm(covs.Rxy.T @ latent.w_x))
    return float(np.linalg.norm(r1) / d1), float(np.linalg.norm(r2) / d2)


def cca_objective(covs: CovarianceSet, w_x: np.ndarray, w_y: np.ndarray) -> float:
    num = w_x @ covs.Rxy @ w_y
    den = np.sqrt((w_x @ covs.Rxx @ w_x) * (w_y @ covs.Ryy @ w_y))
    return float(num / den)


def project(embedded: EmbeddedSeries, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (embedded.vectors.shape[1],):
        raise ValueError(
            f"projection of length {w.shape} does not match embedding dim {embedded.vectors.shape[1]}"
        )
    return embedded.vectors @ w
