#!/usr/bin/env python3
"""Batch image -> embedding extraction.

Walks a directory of crop images, runs each through a named backbone, and
writes the embeddings in one of the toolkit's interchange formats (csv,
jsonl, or rawf32 with a JSON-lines sidecar). The toolkit only sees the
file format; which backbone produced it is this script's concern.

Backbones are resolved from a registry by string identifier. The bundled
backbones are deterministic pixel-statistics encoders, so the adapter runs
anywhere; heavier pretrained models can be registered the same way.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import struct
import sys
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

log = logging.getLogger("extract")

RAWF32_MAGIC = b"FSEM"
RAWF32_VERSION = 1

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".gif", ".tiff", ".webp"}


def _thumbnail_rgb(images: list[Image.Image]) -> np.ndarray:
    """16x16 RGB thumbnails, flattened and scaled to [0, 1]: d=768."""
    rows = []
    for img in images:
        arr = np.asarray(img.convert("RGB").resize((16, 16), Image.BILINEAR))
        rows.append(arr.reshape(-1).astype(np.float32) / 255.0)
    return np.stack(rows)


def _gray_grid(images: list[Image.Image]) -> np.ndarray:
    """32x32 grayscale grid, mean-centered per image: d=1024."""
    rows = []
    for img in images:
        arr = np.asarray(img.convert("L").resize((32, 32), Image.BILINEAR))
        vec = arr.reshape(-1).astype(np.float32) / 255.0
        rows.append(vec - vec.mean())
    return np.stack(rows)


BACKBONES = {
    "thumb-rgb-768": (768, _thumbnail_rgb),
    "gray-grid-1024": (1024, _gray_grid),
}


def resolve_backbone(name: str):
    if name not in BACKBONES:
        known = ", ".join(sorted(BACKBONES))
        raise SystemExit(f"unknown backbone {name!r}; available: {known}")
    return BACKBONES[name]


def find_images(image_dir: Path) -> list[Path]:
    if not image_dir.is_dir():
        raise SystemExit(f"not a directory: {image_dir}")
    return sorted(
        p for p in image_dir.rglob("*")
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )


def load_labels(path: Path | None) -> dict[str, str]:
    """Optional sidecar CSV with header item_id,label."""
    if path is None:
        return {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if "item_id" not in (reader.fieldnames or []) or "label" not in reader.fieldnames:
            raise SystemExit(f"{path}: labels CSV needs item_id,label columns")
        return {row["item_id"]: row["label"] for row in reader if row["label"]}


def extract(image_dir: Path, backbone: str, batch_size: int) -> tuple[list[str], np.ndarray]:
    """Embed every readable image; returns (relative ids, N x d float32)."""
    dim, encode = resolve_backbone(backbone)
    paths = find_images(image_dir)
    if not paths:
        raise SystemExit(f"no images found under {image_dir}")

    ids: list[str] = []
    blocks: list[np.ndarray] = []
    batch_imgs: list[Image.Image] = []
    batch_ids: list[str] = []

    def flush():
        if batch_imgs:
            blocks.append(encode(batch_imgs))
            ids.extend(batch_ids)
            for img in batch_imgs:
                img.close()
            batch_imgs.clear()
            batch_ids.clear()

    for path in paths:
        try:
            img = Image.open(path)
            img.load()
        except (OSError, UnidentifiedImageError) as exc:
            log.warning("skipping unreadable image %s: %s", path, exc)
            continue
        batch_imgs.append(img)
        batch_ids.append(str(path.relative_to(image_dir)))
        if len(batch_imgs) >= batch_size:
            flush()
    flush()

    if not ids:
        raise SystemExit(f"no readable images under {image_dir}")
    vectors = np.vstack(blocks)
    assert vectors.shape == (len(ids), dim)
    return ids, vectors


def write_rawf32(ids, labels, vectors, out: Path):
    n, d = vectors.shape
    with open(out, "wb") as fh:
        fh.write(struct.pack("<4sIII", RAWF32_MAGIC, RAWF32_VERSION, n, d))
        fh.write(np.ascontiguousarray(vectors, dtype="<f4").tobytes())
    with open(out.with_suffix(".jsonl"), "w") as fh:
        for item_id in ids:
            fh.write(json.dumps({"id": item_id, "label": labels.get(item_id)}) + "\n")


def write_csv(ids, labels, vectors, out: Path):
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item_id", "label"] + [f"dim_{j}" for j in range(vectors.shape[1])])
        for item_id, vec in zip(ids, vectors):
            writer.writerow([item_id, labels.get(item_id, "")] + [repr(float(v)) for v in vec])


def write_jsonl(ids, labels, vectors, out: Path):
    with open(out, "w") as fh:
        for item_id, vec in zip(ids, vectors):
            obj = {"id": item_id, "label": labels.get(item_id), "vec": [float(v) for v in vec]}
            fh.write(json.dumps(obj) + "\n")


WRITERS = {"rawf32": write_rawf32, "csv": write_csv, "jsonl": write_jsonl}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--images", required=True, help="directory of crop images")
    parser.add_argument("--backbone", default="thumb-rgb-768", help="backbone identifier")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--out", required=True, help="output embedding file")
    parser.add_argument("--format", choices=sorted(WRITERS), default="rawf32")
    parser.add_argument("--labels", help="optional CSV sidecar (item_id,label)")
    parser.add_argument("--list-backbones", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    if args.list_backbones:
        for name, (dim, _) in sorted(BACKBONES.items()):
            print(f"{name}\td={dim}")
        return 0
    if args.batch_size < 1:
        parser.error("--batch-size must be >= 1")

    labels = load_labels(Path(args.labels) if args.labels else None)
    ids, vectors = extract(Path(args.images), args.backbone, args.batch_size)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    WRITERS[args.format](ids, labels, vectors, out)
    print(f"wrote {out} ({args.format}): N={len(ids)}, d={vectors.shape[1]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
