"""Density-based clustering with classic core/border/noise semantics.

Neighbor queries are brute-force O(N^2): datasets here are a few thousand
rows at most, and exactness keeps the results deterministic and testable.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .assignments import NOISE, HardAssignment
from .validation import check_matrix


class Dbscan(BaseEstimator):
    """DBSCAN over Euclidean distance.

    Cluster ids are assigned in order of the first core point discovered in
    row order; border points are claimed by the first core cluster reaching
    them in scan order. No RNG anywhere: identical input gives identical
    output.
    """

    def __init__(self, eps: float = 0.5, min_pts: int = 5):
        self.eps = eps
        self.min_pts = min_pts

    def fit_predict(self, X, y=None) -> HardAssignment:
        X = check_matrix(X, "X")
        if self.eps <= 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if self.min_pts < 1:
            raise ValueError(f"min_pts must be >= 1, got {self.min_pts}")
        n = X.shape[0]
        dist = _pairwise_distances(X)
        neighbors = [np.nonzero(dist[i] <= self.eps)[0] for i in range(n)]
        is_core = np.array([len(nb) >= self.min_pts for nb in neighbors])

        labels = np.full(n, NOISE, dtype=np.int64)
        cluster = 0
        for i in range(n):
            if not is_core[i] or labels[i] != NOISE:
                continue
            # Breadth-first expansion from this core point.
            labels[i] = cluster
            frontier = [i]
            while frontier:
                j = frontier.pop(0)
                for q in neighbors[j]:
                    if labels[q] == NOISE:
                        labels[q] = cluster
                        if is_core[q]:
                            frontier.append(q)
            cluster += 1
        return HardAssignment(labels, cluster)


def _pairwise_distances(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X * X, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(d2)


def k_distance_profile(X, k: int) -> np.ndarray:
    """Sorted k-th nearest-neighbor distances, the usual elbow plot for eps.

    k counts neighbors excluding the point itself; 1 <= k < N.
    """
    X = check_matrix(X, "X")
    n = X.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")
    dist = _pairwise_distances(X)
    kth = np.sort(dist, axis=1)[:, k]  # column 0 is the self-distance 0
    return np.sort(kth)
