"""Pipeline driver: ingest -> reduce -> cluster / sort -> evaluate -> manifest.

The manifest is the artifact's single output contract: a schema-versioned
JSON document that is self-contained for the viewer (plus the crop
directory) and for later re-evaluation. Reduction results are cached per
content hash so swapping the clusterer reuses the reduction.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import os
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .data import EmbeddingMatrix, l2_normalize, load_embeddings
from .dbscan import Dbscan
from .evaluation import evaluate
from .gmm import select_components
from .ordering import aggregate_runs, sort_1d
from .pca import PcaReducer
from .tsne import TsneEmbedder
from .umap import UmapEmbedder

SCHEMA_VERSION = 1

OUTPUT_ROOT_ENV = "WILDSORT_OUTPUT_ROOT"

DEFAULT_CONFIG = {
    "normalize": True,
    "reduction": {"method": "none"},
    "cluster": None,
    "ordering": None,
    "evaluate": False,
}


class PipelineError(RuntimeError):
    """A stage failed; the message names the stage."""


def load_schema() -> dict:
    text = resources.files("wildsort").joinpath("manifest_schema.json").read_text()
    return json.loads(text)


def validate_manifest(manifest: dict) -> None:
    jsonschema.validate(manifest, load_schema())


def resolve_config(config: dict) -> dict:
    """Fill defaults and check the config's overall shape."""
    cfg = dict(DEFAULT_CONFIG)
    cfg.update(config)
    if "input" not in cfg or "path" not in cfg.get("input", {}):
        raise ValueError("config needs input.path")
    cfg["input"] = dict(cfg["input"])
    cfg["input"].setdefault("format", "csv")
    cfg["input"]["path"] = str(cfg["input"]["path"])
    if "output_dir" not in cfg:
        raise ValueError("config needs output_dir")
    cfg["output_dir"] = str(cfg["output_dir"])
    reduction = cfg["reduction"] or {"method": "none"}
    if reduction.get("method") not in ("none", "pca", "umap"):
        raise ValueError(f"unknown reduction method {reduction.get('method')!r}")
    cluster = cfg["cluster"]
    if cluster is not None and cluster.get("method") not in ("gmm", "dbscan"):
        raise ValueError(f"unknown cluster method {cluster.get('method')!r}")
    cfg["reduction"] = reduction
    return cfg


def resolve_output_dir(output_dir) -> Path:
    path = Path(output_dir)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not path.is_absolute():
        path = Path(root) / path
    return path


def _content_hash(*parts) -> str:
    h = hashlib.sha256()
    for part in parts:
        if isinstance(part, np.ndarray):
            h.update(np.ascontiguousarray(part).tobytes())
        else:
            h.update(json.dumps(part, sort_keys=True).encode())
    return h.hexdigest()[:24]


def _stage(name: str):
    """Decorator-free stage wrapper: re-raise with the stage name attached."""

    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, PipelineError):
                raise PipelineError(f"stage {name!r} failed: {exc}") from exc
            return False

    return _Ctx()


def reduce_stage(m: EmbeddingMatrix, reduction: dict, cache_dir: Path | None) -> tuple[EmbeddingMatrix, dict | None]:
    method = reduction["method"]
    if method == "none":
        return m, None
    key = _content_hash(m.vectors, reduction)
    cache_file = cache_dir / f"reduce_{key}.npz" if cache_dir else None
    if cache_file and cache_file.exists():
        coords = np.load(cache_file)["coords"]
        return m.with_vectors(coords), {"method": method, "cache_key": key}
    if method == "pca":
        q = int(reduction.get("q", min(50, m.dim, m.n - 1)))
        coords = PcaReducer(n_components=q).fit(m.vectors).transform(m.vectors)
    else:
        params = {k: v for k, v in reduction.items() if k != "method"}
        coords = UmapEmbedder(**params).fit_transform(m.vectors).coords
    if cache_file:
        cache_file.parent.mkdir(parents=True, exist_ok=True)
        np.savez(cache_file, coords=coords)
    return m.with_vectors(coords), {"method": method, "cache_key": key}


def cluster_stage(m: EmbeddingMatrix, cluster: dict) -> dict:
    if cluster["method"] == "gmm":
        report, model = select_components(
            m.vectors,
            k_min=int(cluster.get("k_min", 2)),
            k_max=int(cluster.get("k_max", 15)),
            seed=int(cluster.get("seed", 0)),
            n_restarts=int(cluster.get("n_restarts", 5)),
        )
        assignment = model.predict(m.vectors)
        return {
            "method": "gmm",
            "assignment": assignment.to_dict(),
            "bic_report": report.to_dict(),
            "log_likelihood": model.log_likelihood_,
        }
    params = Dbscan(eps=float(cluster["eps"]), min_pts=int(cluster["min_pts"]))
    assignment = params.fit_predict(m.vectors)
    return {"method": "dbscan", "assignment": assignment.to_dict(), "bic_report": None}


def ordering_stage(m: EmbeddingMatrix, ordering_cfg: dict) -> dict:
    runs = int(ordering_cfg.get("runs", 1))
    params = {
        k: v
        for k, v in ordering_cfg.items()
        if k not in ("runs",)
    }
    params.setdefault("output_dim", 1)
    embedder = TsneEmbedder(**params)
    run_dicts = []
    base_seed = embedder.seed
    for r in range(runs):
        p = embedder.get_params()
        p["seed"] = base_seed + r
        emb = TsneEmbedder(**p).fit_transform(m.vectors)
        ordering = sort_1d(emb, m.item_ids)
        run_dicts.append(ordering.to_dict())
    agg = None
    if m.is_fully_labeled():
        agg = aggregate_runs(m.vectors, m.labels, embedder, runs, m.item_ids).to_dict()
    return {"runs": run_dicts, "aggregate_coherence": agg}


def run_pipeline(config: dict, timestamp: str | None = None) -> dict:
    """Execute the configured stages and write the manifest + rendered tables.

    Partial outputs written by a failing run are removed before the error
    propagates.
    """
    cfg = resolve_config(config)
    out_dir = resolve_output_dir(cfg["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        return _run(cfg, out_dir, written, timestamp)
    except Exception:
        for path in written:
            if path.exists():
                path.unlink()
        raise


def _run(cfg: dict, out_dir: Path, written: list[Path], timestamp: str | None) -> dict:
    with _stage("ingest"):
        m = load_embeddings(cfg["input"]["path"], cfg["input"]["format"])
        if cfg["normalize"]:
            m = l2_normalize(m)

    with _stage("reduce"):
        reduced, reduction_info = reduce_stage(m, cfg["reduction"], out_dir / ".cache")

    clustering = None
    if cfg["cluster"] is not None:
        with _stage("cluster"):
            clustering = cluster_stage(reduced, cfg["cluster"])

    ordering = None
    if cfg["ordering"] is not None:
        with _stage("sort"):
            ordering = ordering_stage(reduced, cfg["ordering"])

    evaluation = None
    if cfg["evaluate"]:
        with _stage("eval"):
            if not m.is_fully_labeled():
                raise ValueError("evaluation requires labels")
            if clustering is None:
                raise ValueError("evaluation requires a clustering stage")
            from .assignments import HardAssignment

            assignment = HardAssignment.from_dict(clustering["assignment"])
            evaluation = evaluate(assignment, m.labels).to_dict()

    seeds = {}
    if cfg["cluster"] and cfg["cluster"].get("method") == "gmm":
        seeds["cluster"] = cfg["cluster"].get("seed", 0)
    if cfg["ordering"]:
        base = cfg["ordering"].get("seed", 0)
        seeds["ordering"] = [base + r for r in range(int(cfg["ordering"].get("runs", 1)))]

    manifest = {
        "schema": SCHEMA_VERSION,
        "tool": {"name": "wildsort", "version": __version__},
        "created_at": timestamp
        or datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "dataset": {
            "n": m.n,
            "dim": m.dim,
            "source": str(cfg["input"]["path"]),
            "format": cfg["input"]["format"],
        },
        "config": cfg,
        "items": [
            {"id": it.item_id, "label": it.label, "crop_ref": it.crop_ref}
            for it in m.items
        ],
        "reduction": reduction_info,
        "clustering": clustering,
        "ordering": ordering,
        "evaluation": evaluation,
        "seeds": seeds,
    }
    validate_manifest(manifest)

    manifest_path = out_dir / "manifest.json"
    written.append(manifest_path)
    write_manifest(manifest, manifest_path)

    from .render import render_tables

    tables_path = out_dir / "tables.txt"
    written.append(tables_path)
    tables_path.write_text(render_tables(manifest))
    return manifest


def write_manifest(manifest: dict, path: Path) -> None:
    path.write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")


def load_manifest(path) -> dict:
    manifest = json.loads(Path(path).read_text())
    if manifest.get("schema") != SCHEMA_VERSION:
        raise ValueError(
            f"manifest schema {manifest.get('schema')} != supported {SCHEMA_VERSION}"
        )
    validate_manifest(manifest)
    return manifest
