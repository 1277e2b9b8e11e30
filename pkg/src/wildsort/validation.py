"""Small input-validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

from .data import EmbeddingMatrix


def check_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a finite 2-D float64 array; accepts an EmbeddingMatrix too."""
    if isinstance(X, EmbeddingMatrix):
        return np.asarray(X.vectors, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {X.shape}")
    if not np.isfinite(X).all():
        bad = np.argwhere(~np.isfinite(X))[0]
        raise ValueError(f"{name} has a non-finite value at row {bad[0]}, dim {bad[1]}")
    return X


def check_seed(seed) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ValueError(f"seed must be an integer, got {seed!r}")
    return int(seed)
