"""PCA dimensionality reduction via SVD of the centered data matrix.

Deterministic: per-axis sign ambiguity is fixed by forcing the
largest-magnitude entry of each component positive.
"""

from __future__ import annotations

import json

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .validation import check_matrix


class PcaReducer(BaseEstimator, TransformerMixin):
    """Project onto the top-q principal axes of the sample covariance.

    Attributes after fit: ``mean_`` (d,), ``components_`` (q, d) with
    orthonormal rows, ``explained_variance_`` (q,) descending.
    """

    def __init__(self, n_components: int = 50):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        n, d = X.shape
        q = self.n_components
        if n < 2:
            raise ValueError(f"PCA needs N >= 2, got N={n}")
        if not 1 <= q <= min(n - 1, d):
            raise ValueError(
                f"n_components={q} out of range [1, {min(n - 1, d)}] for N={n}, d={d}"
            )
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        # SVD of centered data: eigenvalues of the covariance are s^2/(N-1).
        _, s, vt = np.linalg.svd(centered, full_matrices=False)
        components = vt[:q]
        # Sign convention: largest-magnitude entry of each axis positive.
        for row in components:
            j = np.argmax(np.abs(row))
            if row[j] < 0:
                row *= -1.0
        self.components_ = components
        self.explained_variance_ = (s[:q] ** 2) / (n - 1)
        self.all_eigenvalues_ = (s**2) / (n - 1)
        return self

    def transform(self, X):
        X = check_matrix(X, "X")
        if X.shape[1] != self.mean_.shape[0]:
            raise ValueError(
                f"dimension mismatch: model d={self.mean_.shape[0]}, input d={X.shape[1]}"
            )
        return (X - self.mean_) @ self.components_.T

    def inverse_transform(self, Z):
        Z = check_matrix(Z, "Z")
        return Z @ self.components_ + self.mean_

    def to_json(self) -> str:
        return json.dumps(
            {
                "mean": self.mean_.tolist(),
                "components": self.components_.tolist(),
                "explained_variance": self.explained_variance_.tolist(),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "PcaReducer":
        obj = json.loads(text)
        model = cls(n_components=len(obj["components"]))
        model.mean_ = np.array(obj["mean"])
        model.components_ = np.array(obj["components"])
        model.explained_variance_ = np.array(obj["explained_variance"])
        return model
