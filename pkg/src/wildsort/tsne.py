"""Student-t neighbor embedding (t-SNE) with exact O(N^2) affinities.

Built for 1D similarity ordering of modest collections (N <= a few
thousand), so affinities and gradients are computed densely; there is no
tree or interpolation approximation. Fully deterministic given the seed.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .lowdim import LowDimEmbedding
from .validation import check_matrix, check_seed

MAX_CALIBRATION_STEPS = 50
CALIBRATION_TOL = 1e-5


class CalibrationError(RuntimeError):
    """Bandwidth search failed to reach the target perplexity for some row."""


class DivergedError(RuntimeError):
    """Objective became non-finite; the learning rate is too high."""


def pairwise_sq_distances(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X * X, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def perplexity_calibration(d2: np.ndarray, perplexity: float):
    """Per-row precision search so each conditional row hits the target
    perplexity 2^H(P_i).

    Returns (betas, P_conditional). P rows sum to 1 with zero diagonal.
    Bisects (with bracket expansion) at most MAX_CALIBRATION_STEPS times per
    row; a row that cannot reach the target within CALIBRATION_TOL raises.
    """
    n = d2.shape[0]
    if d2.shape != (n, n):
        raise ValueError("distance matrix must be square")
    if not np.allclose(d2, d2.T, atol=1e-9):
        raise ValueError("distance matrix must be symmetric")
    if not 1.0 <= perplexity <= n - 1:
        raise ValueError(f"perplexity {perplexity} unreachable for N={n}")

    betas = np.empty(n)
    P = np.zeros((n, n))
    for i in range(n):
        di = np.delete(d2[i], i)
        beta, row = _calibrate_row(di, perplexity, i)
        betas[i] = beta
        P[i, :i] = row[:i]
        P[i, i + 1 :] = row[i:]
    return betas, P


def _row_probs(di: np.ndarray, beta: float) -> tuple[np.ndarray, float]:
    """Conditional probabilities and perplexity 2^H for one row."""
    logits = -beta * di
    logits -= logits.max()
    p = np.exp(logits)
    total = p.sum()
    p /= total
    # H in nats; perplexity = exp(H).
    nz = p > 0
    h = -np.sum(p[nz] * np.log(p[nz]))
    return p, np.exp(h)


def _calibrate_row(di: np.ndarray, target: float, row_index: int):
    beta = 1.0
    beta_min, beta_max = 0.0, np.inf
    p, pp = _row_probs(di, beta)
    for _ in range(MAX_CALIBRATION_STEPS):
        if abs(pp - target) < CALIBRATION_TOL:
            return beta, p
        if pp > target:  # too flat -> sharpen
            beta_min = beta
            beta = beta * 2.0 if not np.isfinite(beta_max) else 0.5 * (beta + beta_max)
        else:
            beta_max = beta
            beta = beta / 2.0 if beta_min == 0.0 else 0.5 * (beta + beta_min)
        p, pp = _row_probs(di, beta)
    if abs(pp - target) < CALIBRATION_TOL:
        return beta, p
    raise CalibrationError(
        f"row {row_index}: perplexity {pp:.6f} never reached target {target} "
        f"in {MAX_CALIBRATION_STEPS} steps"
    )


def joint_probabilities(X: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized affinities P = (P_(j|i) + P_(i|j)) / 2N; sums to 1."""
    d2 = pairwise_sq_distances(X)
    _, cond = perplexity_calibration(d2, perplexity)
    P = (cond + cond.T) / (2.0 * cond.shape[0])
    return P


def kl_and_grad(P: np.ndarray, Y: np.ndarray) -> tuple[float, np.ndarray]:
    """KL(P || Q) under the Student-t (df=1) kernel and its analytic gradient.

    grad_i = 4 * sum_j (p_ij - q_ij) * w_ij * (y_i - y_j)
    with w_ij = 1 / (1 + ||y_i - y_j||^2) and q = w / sum(w).
    """
    n = Y.shape[0]
    d2 = pairwise_sq_distances(Y)
    W = 1.0 / (1.0 + d2)
    np.fill_diagonal(W, 0.0)
    Z = W.sum()
    Q = W / Z
    mask = P > 0
    kl = float(np.sum(P[mask] * np.log(P[mask] / np.maximum(Q[mask], 1e-300))))
    M = (P - Q) * W
    grad = 4.0 * ((np.diag(M.sum(axis=1)) - M) @ Y)
    return kl, grad


class TsneEmbedder(BaseEstimator):
    """Gradient-descent t-SNE to 1 or 2 dimensions.

    Early exaggeration multiplies the affinities for the first
    ``exaggeration_iters`` iterations; momentum switches from 0.5 to 0.8 at
    that point. Initial coordinates are Gaussian(0, 1e-4) from the seed.
    """

    def __init__(
        self,
        output_dim: int = 1,
        perplexity: float = 30.0,
        learning_rate: float = 200.0,
        iterations: int = 1000,
        exaggeration_factor: float = 2.0,
        exaggeration_iters: int = 250,
        seed: int = 0,
    ):
        self.output_dim = output_dim
        self.perplexity = perplexity
        self.learning_rate = learning_rate
        self.iterations = iterations
        self.exaggeration_factor = exaggeration_factor
        self.exaggeration_iters = exaggeration_iters
        self.seed = seed

    def _validate(self, n: int):
        if self.output_dim not in (1, 2):
            raise ValueError(f"output_dim must be 1 or 2, got {self.output_dim}")
        if self.perplexity < 2:
            raise ValueError(f"perplexity must be >= 2, got {self.perplexity}")
        if 3.0 * self.perplexity >= n:
            raise ValueError(
                f"need 3*perplexity < N (perplexity={self.perplexity}, N={n})"
            )

    def fit_transform(self, X) -> LowDimEmbedding:
        X = check_matrix(X, "X")
        n = X.shape[0]
        self._validate(n)
        check_seed(self.seed)
        rng = np.random.default_rng([0x74736E65, self.seed])

        P = joint_probabilities(X, self.perplexity)
        Y = 1e-2 * rng.standard_normal((n, self.output_dim))  # std 1e-2 -> var 1e-4
        velocity = np.zeros_like(Y)
        gains = np.ones_like(Y)

        kl = np.nan
        self.kl_history_ = []
        for it in range(self.iterations):
            exaggerating = it < self.exaggeration_iters
            P_eff = P * self.exaggeration_factor if exaggerating else P
            kl, grad = kl_and_grad(P_eff, Y)
            if not np.isfinite(kl):
                raise DivergedError(
                    "objective diverged; lower learning_rate or exaggeration_factor"
                )
            momentum = 0.5 if exaggerating else 0.8
            # Adaptive per-coordinate gains, standard delta-bar-delta scheme.
            same_sign = np.sign(grad) == np.sign(velocity)
            gains = np.where(same_sign, gains * 0.8, gains + 0.2)
            np.clip(gains, 0.01, None, out=gains)
            velocity = momentum * velocity - self.learning_rate * gains * grad
            Y = Y + velocity
            Y -= Y.mean(axis=0)
            self.kl_history_.append(kl)

        final_kl, _ = kl_and_grad(P, Y)
        return LowDimEmbedding(
            coords=Y,
            config=self.get_params(),
            final_objective=float(final_kl),
        )
