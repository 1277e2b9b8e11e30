"""Hard cluster assignments, shared by the GMM and DBSCAN paths."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NOISE = -1  # density-based noise marker


@dataclass(frozen=True)
class HardAssignment:
    """Per-item cluster index; -1 marks noise (density-based clustering only)."""

    cluster_of: np.ndarray = field(repr=False)
    k: int

    def __post_init__(self):
        arr = np.asarray(self.cluster_of, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("cluster_of must be 1-D")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        valid = (arr == NOISE) | ((arr >= 0) & (arr < self.k))
        if not valid.all():
            bad = int(np.nonzero(~valid)[0][0])
            raise ValueError(
                f"cluster index {arr[bad]} at position {bad} outside [0, {self.k}) and not noise"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "cluster_of", arr)

    @property
    def n(self) -> int:
        return self.cluster_of.shape[0]

    def to_dict(self) -> dict:
        return {"k": self.k, "cluster_of": self.cluster_of.tolist()}

    @classmethod
    def from_dict(cls, obj: dict) -> "HardAssignment":
        return cls(np.array(obj["cluster_of"], dtype=np.int64), int(obj["k"]))
