"""Seeded synthetic embedding fixtures: labeled Gaussian blobs with a
guaranteed centroid-separation floor.

Centroids sit on a randomly rotated regular simplex scaled so the pairwise
distance is exactly ``separation`` (in units of within-cluster sigma), which
makes the separation a hard guarantee rather than an expectation.

Within-cluster sigma is the RMS radius: a cluster's expected squared
distance from its centroid is sigma^2 (per-axis noise std sigma/sqrt(d)),
so ``separation`` compares centroid spacing against the overall cluster
size independent of dimension.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import EmbeddingMatrix, ItemRecord


@dataclass(frozen=True)
class FixtureSpec:
    n_clusters: int
    per_cluster_n: int
    dim: int
    separation: float
    seed: int
    anisotropy: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.n_clusters < 1 or self.per_cluster_n < 1 or self.dim < 1:
            raise ValueError("all counts must be >= 1")
        if self.separation <= 0:
            raise ValueError("separation must be > 0")
        if self.dim < self.n_clusters - 1:
            raise ValueError(
                f"dim={self.dim} too small to place {self.n_clusters} "
                f"equidistant centroids (need dim >= n_clusters - 1)"
            )


def _simplex_centroids(k: int, dim: int, separation: float, rng: np.random.Generator):
    """k points in R^dim with all pairwise distances exactly `separation`,
    randomly rotated."""
    if k == 1:
        return np.zeros((1, dim))
    # Regular simplex in k-1 dims: identity corners centered, then scaled.
    corners = np.eye(k)
    corners -= corners.mean(axis=0)
    # Pairwise distance between identity corners is sqrt(2).
    corners *= separation / np.sqrt(2.0)
    # Project to the (k-1)-dim span, embed into dim, random rotation.
    _, _, vt = np.linalg.svd(corners, full_matrices=False)
    coords = corners @ vt[: k - 1].T  # k x (k-1), distances preserved
    embedded = np.zeros((k, dim))
    embedded[:, : k - 1] = coords
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    return embedded @ q.T


def generate(spec: FixtureSpec) -> EmbeddingMatrix:
    """Generate a labeled Gaussian-mixture dataset, deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    centroids = _simplex_centroids(spec.n_clusters, spec.dim, spec.separation, rng)
    if spec.anisotropy is not None:
        lo, hi = spec.anisotropy
        scales = rng.uniform(lo, hi, size=spec.n_clusters)
    else:
        scales = np.ones(spec.n_clusters)

    axis_std = 1.0 / np.sqrt(spec.dim)
    items = []
    rows = []
    for c in range(spec.n_clusters):
        pts = centroids[c] + scales[c] * axis_std * rng.standard_normal(
            (spec.per_cluster_n, spec.dim)
        )
        label = f"cluster_{c}"
        for j in range(spec.per_cluster_n):
            items.append(ItemRecord(f"c{c}_i{j:05d}", label))
        rows.append(pts)
    return EmbeddingMatrix(tuple(items), np.vstack(rows))


def true_centroids(spec: FixtureSpec) -> np.ndarray:
    """The exact centroids `generate` used (same seed, same draw order)."""
    rng = np.random.default_rng(spec.seed)
    return _simplex_centroids(spec.n_clusters, spec.dim, spec.separation, rng)
