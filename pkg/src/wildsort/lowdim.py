"""Result container shared by the neighbor-embedding reducers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LowDimEmbedding:
    """Low-dimensional coordinates, row i <-> input row i.

    ``final_objective`` is the optimized loss: KL divergence for the
    Student-t embedding, membership cross-entropy for the fuzzy-graph one.
    """

    coords: np.ndarray = field(repr=False)
    config: dict = field(default_factory=dict)
    final_objective: float = float("nan")

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim != 2:
            raise ValueError(f"coords must be 2-D, got shape {coords.shape}")
        if not np.isfinite(coords).all():
            raise ValueError("coords contain non-finite values")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def output_dim(self) -> int:
        return self.coords.shape[1]

    def to_dict(self) -> dict:
        return {
            "coords": self.coords.tolist(),
            "config": self.config,
            "final_objective": self.final_objective,
        }
