"""Full-covariance Gaussian mixture fitted by EM, with BIC model selection.

The free-parameter count for k components in d dimensions is

    p(k) = k * [d + d(d+1)/2] + (k - 1)

(means, covariance upper triangles, and k-1 independent mixture weights),
and BIC(k) = -2 ln L + p(k) ln N; the selected component count minimizes
BIC over the search range, ties broken toward smaller k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cholesky, solve_triangular, LinAlgError
from scipy.special import logsumexp
from sklearn.base import BaseEstimator

from .assignments import HardAssignment
from .validation import check_matrix, check_seed

_LOG_2PI = np.log(2.0 * np.pi)

REG_INITIAL = 1e-6
REG_MAX = 1e-2


class CovarianceSingularError(RuntimeError):
    """Covariance stayed singular after regularization escalation."""


def free_param_count(k: int, d: int) -> int:
    """Independently adjustable parameters of a k-component full-covariance GMM."""
    return k * (d + d * (d + 1) // 2) + (k - 1)


def bic_score(log_likelihood: float, k: int, d: int, n: int) -> tuple[int, float]:
    """Return (p, BIC) for a fitted mixture on n samples."""
    if n < 2:
        raise ValueError(f"BIC needs n >= 2, got {n}")
    p = free_param_count(k, d)
    return p, -2.0 * log_likelihood + p * np.log(n)


def _regularized_cholesky(cov: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower Cholesky factor, escalating diagonal regularization on failure.

    Returns (chol, cov_used). Raises CovarianceSingularError past REG_MAX.
    """
    d = cov.shape[0]
    scale = np.trace(cov) / d
    if scale <= 0 or not np.isfinite(scale):
        scale = 1.0
    reg = 0.0
    while True:
        cov_r = cov if reg == 0.0 else cov + reg * scale * np.eye(d)
        try:
            return cholesky(cov_r, lower=True), cov_r
        except LinAlgError:
            reg = REG_INITIAL if reg == 0.0 else reg * 10.0
            if reg > REG_MAX:
                raise CovarianceSingularError(
                    f"covariance singular after regularization up to {REG_MAX}"
                ) from None


def _component_log_density(X: np.ndarray, mean: np.ndarray, chol: np.ndarray) -> np.ndarray:
    """log N(x; mean, Sigma) for all rows, given the lower Cholesky of Sigma."""
    d = X.shape[1]
    z = solve_triangular(chol, (X - mean).T, lower=True)
    maha = np.sum(z * z, axis=0)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    return -0.5 * (d * _LOG_2PI + logdet + maha)


def _kmeanspp_centers(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[c] = X[rng.integers(n)]
        else:
            centers[c] = X[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((X - centers[c]) ** 2, axis=1))
    return centers


class GaussianMixtureEM(BaseEstimator):
    """EM-fitted mixture of full-covariance Gaussians.

    Runs ``n_restarts`` independent k-means++ seeded EM runs from the given
    seed and keeps the highest final log-likelihood. Deterministic: same
    data + seed gives a bit-identical model.
    """

    def __init__(
        self,
        n_components: int = 2,
        seed: int = 0,
        n_restarts: int = 5,
        max_iter: int = 200,
        tol: float = 1e-6,
    ):
        self.n_components = n_components
        self.seed = seed
        self.n_restarts = n_restarts
        self.max_iter = max_iter
        self.tol = tol

    # -- fitting ---------------------------------------------------------

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        check_seed(self.seed)
        n, d = X.shape
        k = self.n_components
        if k < 1:
            raise ValueError("n_components must be >= 1")
        if k >= n:
            raise ValueError(f"n_components={k} requires more than {k} samples, got {n}")
        rng = np.random.default_rng([0x6D6D, self.seed])
        best = None
        self.all_histories_ = []
        for _ in range(max(1, self.n_restarts)):
            run = self._fit_once(X, rng)
            self.all_histories_.append(run["history"])
            if best is None or run["log_likelihood"] > best["log_likelihood"]:
                best = run
        self.weights_ = best["weights"]
        self.means_ = best["means"]
        self.covariances_ = best["covariances"]
        self.log_likelihood_ = best["log_likelihood"]
        self.log_likelihood_history_ = best["history"]
        self.n_iter_ = best["n_iter"]
        self.converged_ = best["converged"]
        return self

    def _fit_once(self, X: np.ndarray, rng: np.random.Generator) -> dict:
        n, d = X.shape
        k = self.n_components
        # Constant covariance floor, fixed for the whole run so every
        # iteration optimizes the same (floored) model and the EM ascent
        # property holds; per-evaluation escalation remains a fail-safe.
        scale = float(np.trace(np.cov(X, rowvar=False, bias=True).reshape(d, d))) / d
        self._cov_floor = REG_INITIAL * (scale if scale > 0 else 1.0)
        weights, means, covariances = self._initialize(X, rng)

        history = []
        prev_ll = -np.inf
        converged = False
        n_iter = 0
        for n_iter in range(1, self.max_iter + 1):
            log_resp, ll = self._e_step(X, weights, means, covariances)
            weights, means, covariances = self._m_step(X, log_resp)
            history.append(ll)
            if np.isfinite(prev_ll):
                rel = abs(ll - prev_ll) / max(abs(prev_ll), 1.0)
                if rel < self.tol:
                    converged = True
                    break
            prev_ll = ll
        # Final log-likelihood of the returned parameters.
        _, ll = self._e_step(X, weights, means, covariances)
        history.append(ll)
        return {
            "weights": weights,
            "means": means,
            "covariances": covariances,
            "log_likelihood": ll,
            "history": np.array(history),
            "n_iter": n_iter,
            "converged": converged,
        }

    def _initialize(self, X: np.ndarray, rng: np.random.Generator):
        """k-means++ seeding refined by a few Lloyd iterations; parameters
        come from the resulting hard partition."""
        n, d = X.shape
        k = self.n_components
        means = _kmeanspp_centers(X, k, rng)
        for _ in range(10):
            d2 = (
                np.sum(X * X, axis=1)[:, None]
                - 2.0 * X @ means.T
                + np.sum(means * means, axis=1)[None, :]
            )
            labels = np.argmin(d2, axis=1)
            for j in range(k):
                members = X[labels == j]
                if members.shape[0]:
                    means[j] = members.mean(axis=0)

        base_cov = np.cov(X, rowvar=False, bias=True).reshape(d, d)
        floor = self._cov_floor * np.eye(d)
        weights = np.empty(k)
        covariances = np.empty((k, d, d))
        for j in range(k):
            members = X[labels == j]
            weights[j] = max(members.shape[0], 1) / n
            if members.shape[0] > d:
                cov = np.cov(members, rowvar=False, bias=True).reshape(d, d)
                covariances[j] = cov + floor
            else:
                covariances[j] = base_cov + floor
        weights /= weights.sum()
        return weights, means, covariances

    def _e_step(self, X, weights, means, covariances):
        log_joint = self._weighted_log_prob(X, weights, means, covariances)
        log_norm = logsumexp(log_joint, axis=1)
        return log_joint - log_norm[:, None], float(log_norm.sum())

    @staticmethod
    def _weighted_log_prob(X, weights, means, covariances):
        k = weights.shape[0]
        out = np.empty((X.shape[0], k))
        for j in range(k):
            chol, _ = _regularized_cholesky(covariances[j])
            out[:, j] = np.log(weights[j]) + _component_log_density(X, means[j], chol)
        return out

    def _m_step(self, X, log_resp):
        resp = np.exp(log_resp)
        n, d = X.shape
        nk = resp.sum(axis=0)
        nk = np.maximum(nk, 10 * np.finfo(float).tiny)
        weights = nk / n
        means = (resp.T @ X) / nk[:, None]
        k = resp.shape[1]
        floor = self._cov_floor * np.eye(d)
        covariances = np.empty((k, d, d))
        for j in range(k):
            diff = X - means[j]
            covariances[j] = (resp[:, j] * diff.T) @ diff / nk[j]
            covariances[j] = 0.5 * (covariances[j] + covariances[j].T) + floor
        return weights, means, covariances

    # -- inference -------------------------------------------------------

    def score(self, X) -> float:
        """Total data log-likelihood under the fitted mixture (log-sum-exp stable)."""
        X = check_matrix(X, "X")
        self._check_dim(X)
        log_joint = self._weighted_log_prob(X, self.weights_, self.means_, self.covariances_)
        return float(logsumexp(log_joint, axis=1).sum())

    def predict(self, X) -> HardAssignment:
        """Argmax-responsibility assignment; ties go to the lower component index."""
        X = check_matrix(X, "X")
        self._check_dim(X)
        log_joint = self._weighted_log_prob(X, self.weights_, self.means_, self.covariances_)
        return HardAssignment(np.argmax(log_joint, axis=1), self.n_components)

    def responsibilities(self, X) -> np.ndarray:
        X = check_matrix(X, "X")
        self._check_dim(X)
        log_resp, _ = self._e_step(X, self.weights_, self.means_, self.covariances_)
        return np.exp(log_resp)

    def bic(self, n: int) -> tuple[int, float]:
        d = self.means_.shape[1]
        return bic_score(self.log_likelihood_, self.n_components, d, n)

    def _check_dim(self, X):
        if X.shape[1] != self.means_.shape[1]:
            raise ValueError(
                f"dimension mismatch: model d={self.means_.shape[1]}, input d={X.shape[1]}"
            )

    def to_dict(self) -> dict:
        return {
            "k": self.n_components,
            "weights": self.weights_.tolist(),
            "means": self.means_.tolist(),
            "covariances": self.covariances_.tolist(),
            "log_likelihood": self.log_likelihood_,
        }


# -- BIC sweep -----------------------------------------------------------


@dataclass(frozen=True)
class BicEntry:
    k: int
    param_count: Optional[int]
    bic_value: Optional[float]
    error: Optional[str] = None


@dataclass(frozen=True)
class BicReport:
    entries: tuple[BicEntry, ...]
    selected_k: int
    search_range: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "entries": [
                {"k": e.k, "param_count": e.param_count, "bic": e.bic_value, "error": e.error}
                for e in self.entries
            ],
            "selected_k": self.selected_k,
            "search_range": list(self.search_range),
        }


def select_components(
    X,
    k_min: int = 2,
    k_max: int = 15,
    seed: int = 0,
    n_restarts: int = 5,
    max_iter: int = 200,
    tol: float = 1e-6,
) -> tuple[BicReport, GaussianMixtureEM]:
    """Fit every k in [k_min, k_max], pick the BIC argmin (ties -> smaller k).

    Each k gets an independent RNG stream derived from (seed, k), so the
    sweep order never affects any individual fit. Failed fits are recorded
    in the report and excluded from the argmin; all fits failing is an error.
    """
    X = check_matrix(X, "X")
    n = X.shape[0]
    if not 2 <= k_min <= k_max:
        raise ValueError(f"need 2 <= k_min <= k_max, got [{k_min}, {k_max}]")
    if k_max >= n:
        raise ValueError(f"k_max={k_max} must be < N={n}")

    entries = []
    models: dict[int, GaussianMixtureEM] = {}
    for k in range(k_min, k_max + 1):
        model = GaussianMixtureEM(
            n_components=k,
            seed=_per_k_seed(seed, k),
            n_restarts=n_restarts,
            max_iter=max_iter,
            tol=tol,
        )
        try:
            model.fit(X)
        except (CovarianceSingularError, ValueError) as exc:
            entries.append(BicEntry(k, None, None, error=str(exc)))
            continue
        p, bic_value = model.bic(n)
        entries.append(BicEntry(k, p, bic_value))
        models[k] = model

    ok = [e for e in entries if e.error is None]
    if not ok:
        raise CovarianceSingularError(
            f"every k in [{k_min}, {k_max}] failed to fit"
        )
    best = min(ok, key=lambda e: (e.bic_value, e.k))
    report = BicReport(tuple(entries), best.k, (k_min, k_max))
    return report, models[best.k]


def _per_k_seed(seed: int, k: int) -> int:
    # Independent stream per k so parallel and serial sweeps agree.
    return int(np.random.SeedSequence([check_seed(seed), k]).generate_state(1)[0])
