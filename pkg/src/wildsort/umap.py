"""Fuzzy-graph neighbor embedding (UMAP-style) with an exact k-NN graph.

High-dimensional structure is a fuzzy union of locally calibrated k-NN
memberships; the layout minimizes membership cross-entropy by stochastic
gradient descent with uniform negative sampling. Exact brute-force
neighbors, deterministic given the seed.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import curve_fit
from sklearn.base import BaseEstimator

from .lowdim import LowDimEmbedding
from .tsne import pairwise_sq_distances
from .validation import check_matrix, check_seed

SMOOTH_K_TOL = 1e-5
SMOOTH_K_STEPS = 64
MIN_SIGMA = 1e-12


def exact_knn(X: np.ndarray, n_neighbors: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices and distances of each row's n_neighbors nearest others."""
    d = np.sqrt(pairwise_sq_distances(X))
    np.fill_diagonal(d, np.inf)
    idx = np.argsort(d, axis=1, kind="stable")[:, :n_neighbors]
    return idx, np.take_along_axis(d, idx, axis=1)


def smooth_knn_calibration(knn_dists: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row (rho, sigma): rho is the nearest-neighbor distance (local
    connectivity 1); sigma solves sum_j exp(-max(0, d_ij - rho)/sigma) =
    log2(k) by bisection."""
    n, k = knn_dists.shape
    target = np.log2(k)
    rhos = knn_dists[:, 0].copy()
    sigmas = np.empty(n)
    for i in range(n):
        shifted = np.maximum(knn_dists[i] - rhos[i], 0.0)
        if shifted.max() <= 0.0:
            sigmas[i] = 1.0  # all neighbors at rho: any sigma gives strength 1
            continue
        lo, hi = 0.0, np.inf
        sigma = 1.0
        for _ in range(SMOOTH_K_STEPS):
            val = np.exp(-shifted / sigma).sum()
            if abs(val - target) < SMOOTH_K_TOL:
                break
            if val > target:
                hi = sigma
                sigma = 0.5 * (lo + sigma)
            else:
                lo = sigma
                sigma = sigma * 2.0 if not np.isfinite(hi) else 0.5 * (sigma + hi)
        sigmas[i] = max(sigma, MIN_SIGMA)
    return rhos, sigmas


def membership_strengths(
    knn_idx: np.ndarray, knn_dists: np.ndarray, rhos: np.ndarray, sigmas: np.ndarray, n: int
) -> np.ndarray:
    """Dense symmetric fuzzy graph: union a + b - a*b of directed strengths."""
    A = np.zeros((n, n))
    rows = np.repeat(np.arange(n), knn_idx.shape[1])
    strengths = np.exp(
        -np.maximum(knn_dists - rhos[:, None], 0.0) / sigmas[:, None]
    ).ravel()
    A[rows, knn_idx.ravel()] = strengths
    return A + A.T - A * A.T


def fit_ab(min_dist: float) -> tuple[float, float]:
    """Fit the low-dim curve 1/(1 + a*y^(2b)) to the ideal offset
    exponential with the given min_dist."""
    y = np.linspace(0.0, 3.0, 300)
    target = np.where(y < min_dist, 1.0, np.exp(-(y - min_dist)))

    def curve(y, a, b):
        return 1.0 / (1.0 + a * y ** (2.0 * b))

    (a, b), _ = curve_fit(curve, y, target, p0=(1.0, 1.0), maxfev=10000)
    return float(a), float(b)


def cross_entropy(W: np.ndarray, Y: np.ndarray, a: float, b: float) -> float:
    """Fuzzy membership cross-entropy between graph W and the layout."""
    d2 = pairwise_sq_distances(Y)
    phi = 1.0 / (1.0 + a * np.maximum(d2, 1e-12) ** b)
    np.fill_diagonal(phi, 0.0)
    eps = 1e-12
    mask = ~np.eye(W.shape[0], dtype=bool)
    w = W[mask]
    p = np.clip(phi[mask], eps, 1.0 - eps)
    wc = np.clip(w, eps, 1.0 - eps)
    ce = w * np.log(wc / p) + (1.0 - w) * np.log((1.0 - wc) / (1.0 - p))
    return float(ce.sum())


class UmapEmbedder(BaseEstimator):
    """Fuzzy k-NN graph layout to an arbitrary output dimension."""

    def __init__(
        self,
        n_neighbors: int = 15,
        min_dist: float = 0.5,
        output_dim: int = 10,
        n_epochs: int = 300,
        seed: int = 0,
        negative_samples: int = 5,
    ):
        self.n_neighbors = n_neighbors
        self.min_dist = min_dist
        self.output_dim = output_dim
        self.n_epochs = n_epochs
        self.seed = seed
        self.negative_samples = negative_samples

    def _validate(self, n: int):
        if not 2 <= self.n_neighbors < n:
            raise ValueError(
                f"need 2 <= n_neighbors < N (n_neighbors={self.n_neighbors}, N={n})"
            )
        if self.min_dist < 0:
            raise ValueError(f"min_dist must be >= 0, got {self.min_dist}")
        if self.output_dim < 1:
            raise ValueError(f"output_dim must be >= 1, got {self.output_dim}")

    def graph(self, X) -> np.ndarray:
        """The symmetric fuzzy membership graph (exposed for testing)."""
        X = check_matrix(X, "X")
        self._validate(X.shape[0])
        idx, dists = exact_knn(X, self.n_neighbors)
        rhos, sigmas = smooth_knn_calibration(dists)
        return membership_strengths(idx, dists, rhos, sigmas, X.shape[0])

    def fit_transform(self, X) -> LowDimEmbedding:
        X = check_matrix(X, "X")
        n = X.shape[0]
        self._validate(n)
        check_seed(self.seed)
        rng = np.random.default_rng([0x756D6170, self.seed])

        W = self.graph(X)
        a, b = fit_ab(self.min_dist)

        src, dst = np.nonzero(W > 1e-8)
        keep = src != dst
        src, dst = src[keep], dst[keep]
        w_edge = W[src, dst]

        Y = self._initial_layout(X, rng)
        for epoch in range(self.n_epochs):
            alpha = 1.0 * (1.0 - epoch / self.n_epochs)
            self._epoch(Y, src, dst, w_edge, a, b, alpha, rng, n)
        if not np.isfinite(Y).all():
            raise RuntimeError("layout produced non-finite coordinates")

        return LowDimEmbedding(
            coords=Y,
            config=self.get_params(),
            final_objective=cross_entropy(W, Y, a, b),
        )

    def _initial_layout(self, X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """PCA of the input scaled to a ~10-unit spread, plus seed jitter;
        falls back to a random layout when the data is too small or thin."""
        n, d = X.shape
        q = self.output_dim
        if n > q and d >= q:
            centered = X - X.mean(axis=0)
            _, _, vt = np.linalg.svd(centered, full_matrices=False)
            Y = centered @ vt[:q].T
            span = np.abs(Y).max()
            if span > 0:
                Y *= 10.0 / span
            return Y + 1e-4 * rng.standard_normal((n, q))
        return rng.uniform(-10.0, 10.0, size=(n, q))

    def _epoch(self, Y, src, dst, w_edge, a, b, alpha, rng, n):
        # Attraction along graph edges, weighted by membership strength.
        diff = Y[src] - Y[dst]
        d2 = np.sum(diff * diff, axis=1)
        grad_coef = np.where(
            d2 > 0.0,
            (-2.0 * a * b * np.maximum(d2, 1e-12) ** (b - 1.0))
            / (1.0 + a * np.maximum(d2, 1e-12) ** b),
            0.0,
        )
        move = np.clip((grad_coef * w_edge)[:, None] * diff, -4.0, 4.0)
        np.add.at(Y, src, alpha * move)

        # Uniform negative sampling for repulsion.
        for _ in range(self.negative_samples):
            neg = rng.integers(0, n, size=src.shape[0])
            diff = Y[src] - Y[neg]
            d2 = np.sum(diff * diff, axis=1)
            rep = (2.0 * b) / ((0.001 + d2) * (1.0 + a * np.maximum(d2, 1e-12) ** b))
            rep[neg == src] = 0.0
            move = np.clip(rep[:, None] * diff, -4.0, 4.0)
            np.add.at(Y, src, alpha * move)
