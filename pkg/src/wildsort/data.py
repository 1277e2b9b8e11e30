"""Embedding collections: loading, validation, normalization, serialization.

Three interchangeable on-disk formats are supported:

* ``csv``    -- header ``item_id,label,dim_0..dim_{d-1}``; empty label = unlabeled
* ``jsonl``  -- one object per row with keys ``id``, ``label`` (nullable), ``vec``
* ``rawf32`` -- 16-byte header (magic ``FSEM``, u32 version=1, u32 N, u32 d,
  all little-endian) followed by N*d little-endian float32 values; item ids
  and labels live in a JSON-lines sidecar with the same stem
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

RAWF32_MAGIC = b"FSEM"
RAWF32_VERSION = 1

FORMATS = ("csv", "jsonl", "rawf32")


class EmbeddingFormatError(ValueError):
    """Raised when an embedding file violates its declared format."""


@dataclass(frozen=True)
class ItemRecord:
    """One embedded item: identity plus optional ground truth and crop image.

    Labels are evaluation-only; no clustering or ordering code may read them.
    """

    item_id: str
    label: Optional[str] = None
    crop_ref: Optional[str] = None


@dataclass(frozen=True)
class EmbeddingMatrix:
    """N items with their d-dimensional feature vectors, row i <-> items[i]."""

    items: tuple[ItemRecord, ...]
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise EmbeddingFormatError(f"vectors must be 2-D, got shape {vectors.shape}")
        if vectors.shape[0] != len(self.items):
            raise EmbeddingFormatError(
                f"{len(self.items)} items but {vectors.shape[0]} vector rows"
            )
        if vectors.shape[0] < 1 or vectors.shape[1] < 1:
            raise EmbeddingFormatError("need N >= 1 and d >= 1")
        bad = np.argwhere(~np.isfinite(vectors))
        if bad.size:
            r, c = bad[0]
            raise EmbeddingFormatError(f"non-finite value at row {r}, dim {c}")
        seen = set()
        for i, item in enumerate(self.items):
            if item.item_id in seen:
                raise EmbeddingFormatError(f"duplicate item_id {item.item_id!r} at row {i}")
            seen.add(item.item_id)
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def labels(self) -> tuple[Optional[str], ...]:
        return tuple(item.label for item in self.items)

    @property
    def item_ids(self) -> tuple[str, ...]:
        return tuple(item.item_id for item in self.items)

    def is_fully_labeled(self) -> bool:
        return all(item.label is not None for item in self.items)

    def with_vectors(self, vectors: np.ndarray) -> "EmbeddingMatrix":
        """Same items, new vectors (used after normalization / reduction)."""
        return EmbeddingMatrix(self.items, np.asarray(vectors, dtype=np.float64))

    def without_labels(self) -> "EmbeddingMatrix":
        items = tuple(
            ItemRecord(it.item_id, None, it.crop_ref) for it in self.items
        )
        return EmbeddingMatrix(items, self.vectors.copy())


def l2_normalize(m: EmbeddingMatrix) -> EmbeddingMatrix:
    """Scale every row to unit Euclidean norm.

    Raises on zero-norm rows (reports the first offending index).
    """
    norms = np.linalg.norm(m.vectors, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise ValueError(f"cannot normalize zero-norm row {zero[0]}")
    return m.with_vectors(m.vectors / norms[:, None])


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".jsonl")


def load_embeddings(path, format: str) -> EmbeddingMatrix:
    """Load and validate an embedding file in the given format."""
    path = Path(path)
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}, expected one of {FORMATS}")
    if not path.exists():
        raise FileNotFoundError(path)
    if format == "csv":
        return _load_csv(path)
    if format == "jsonl":
        return _load_jsonl(path)
    return _load_rawf32(path)


def save_embeddings(m: EmbeddingMatrix, path, format: str) -> None:
    """Write an EmbeddingMatrix in the given format (inverse of load)."""
    path = Path(path)
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}, expected one of {FORMATS}")
    path.parent.mkdir(parents=True, exist_ok=True)
    if format == "csv":
        _save_csv(m, path)
    elif format == "jsonl":
        _save_jsonl(m, path)
    else:
        _save_rawf32(m, path)


def _load_csv(path: Path) -> EmbeddingMatrix:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmbeddingFormatError(f"{path}: empty file") from None
        if header[:2] != ["item_id", "label"]:
            raise EmbeddingFormatError(
                f"{path}: header must start with item_id,label; got {header[:2]}"
            )
        dim = len(header) - 2
        if dim < 1:
            raise EmbeddingFormatError(f"{path}: no dim_* columns in header")
        items = []
        rows = []
        for i, row in enumerate(reader):
            if len(row) != dim + 2:
                raise EmbeddingFormatError(
                    f"{path}: row {i} has {len(row) - 2} dims, expected {dim}"
                )
            label = row[1] if row[1] != "" else None
            items.append(ItemRecord(row[0], label))
            try:
                rows.append([float(v) for v in row[2:]])
            except ValueError as exc:
                raise EmbeddingFormatError(f"{path}: row {i}: {exc}") from None
    return EmbeddingMatrix(tuple(items), np.array(rows, dtype=np.float64))


def _save_csv(m: EmbeddingMatrix, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item_id", "label"] + [f"dim_{j}" for j in range(m.dim)])
        for item, vec in zip(m.items, m.vectors):
            writer.writerow(
                [item.item_id, item.label or ""] + [repr(float(v)) for v in vec]
            )


def _load_jsonl(path: Path) -> EmbeddingMatrix:
    items = []
    rows = []
    dim = None
    with open(path) as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EmbeddingFormatError(f"{path}: row {i}: {exc}") from None
            if "id" not in obj or "vec" not in obj:
                raise EmbeddingFormatError(f"{path}: row {i}: missing 'id' or 'vec'")
            vec = obj["vec"]
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise EmbeddingFormatError(
                    f"{path}: row {i} has {len(vec)} dims, expected {dim}"
                )
            items.append(ItemRecord(str(obj["id"]), obj.get("label"), obj.get("crop_ref")))
            rows.append(vec)
    if not rows:
        raise EmbeddingFormatError(f"{path}: no rows")
    return EmbeddingMatrix(tuple(items), np.array(rows, dtype=np.float64))


def _save_jsonl(m: EmbeddingMatrix, path: Path) -> None:
    with open(path, "w") as fh:
        for item, vec in zip(m.items, m.vectors):
            obj = {"id": item.item_id, "label": item.label, "vec": [float(v) for v in vec]}
            if item.crop_ref is not None:
                obj["crop_ref"] = item.crop_ref
            fh.write(json.dumps(obj) + "\n")


def _load_rawf32(path: Path) -> EmbeddingMatrix:
    data = path.read_bytes()
    if len(data) < 16:
        raise EmbeddingFormatError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, n, d = struct.unpack("<4sIII", data[:16])
    if magic != RAWF32_MAGIC:
        raise EmbeddingFormatError(f"{path}: bad magic {magic!r}")
    if version != RAWF32_VERSION:
        raise EmbeddingFormatError(f"{path}: unsupported version {version}")
    expected = 16 + 4 * n * d
    if len(data) != expected:
        raise EmbeddingFormatError(
            f"{path}: expected {expected} bytes for N={n}, d={d}; got {len(data)}"
        )
    vectors = np.frombuffer(data, dtype="<f4", offset=16).reshape(n, d).astype(np.float64)
    items = _load_sidecar(_sidecar_path(path), n)
    return EmbeddingMatrix(items, vectors)


def _load_sidecar(path: Path, n: int) -> tuple[ItemRecord, ...]:
    if not path.exists():
        return tuple(ItemRecord(f"item_{i:06d}") for i in range(n))
    items = []
    with open(path) as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            items.append(ItemRecord(str(obj["id"]), obj.get("label"), obj.get("crop_ref")))
    if len(items) != n:
        raise EmbeddingFormatError(
            f"{path}: sidecar has {len(items)} items but matrix has {n} rows"
        )
    return tuple(items)


def _save_rawf32(m: EmbeddingMatrix, path: Path) -> None:
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIII", RAWF32_MAGIC, RAWF32_VERSION, m.n, m.dim))
        fh.write(np.ascontiguousarray(m.vectors, dtype="<f4").tobytes())
    with open(_sidecar_path(path), "w") as fh:
        for item in m.items:
            obj = {"id": item.item_id, "label": item.label}
            if item.crop_ref is not None:
                obj["crop_ref"] = item.crop_ref
            fh.write(json.dumps(obj) + "\n")


def load_labels_sidecar(path) -> dict[str, str]:
    """Read a (item_id, label) JSON-lines file, e.g. one exported by the viewer."""
    labels = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            labels[str(obj["id"])] = obj["label"]
    return labels


def apply_labels(m: EmbeddingMatrix, labels: dict[str, str]) -> EmbeddingMatrix:
    """Attach labels by item_id; items absent from the mapping stay unlabeled."""
    items = tuple(
        ItemRecord(it.item_id, labels.get(it.item_id, it.label), it.crop_ref)
        for it in m.items
    )
    return EmbeddingMatrix(items, m.vectors.copy())
