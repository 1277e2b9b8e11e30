"""Command-line interface.

Subcommands:

* ``ingest``  -- validate an embedding file, optionally convert formats
* ``cluster`` -- reduce + cluster, write a manifest
* ``sort``    -- reduce + 1D ordering, write a manifest
* ``eval``    -- re-evaluate a manifest's clustering against a labels sidecar
* ``run``     -- full pipeline from a JSON config file (plus flag overrides)
* ``render``  -- print a manifest's tables
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .assignments import HardAssignment
from .data import FORMATS, apply_labels, load_embeddings, load_labels_sidecar, save_embeddings
from .evaluation import evaluate
from .pipeline import load_manifest, run_pipeline, write_manifest
from .render import render_tables


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wildsort",
        description="Organize unlabeled embeddings: cluster, sort, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and optionally convert an embedding file")
    _add_input_args(p)
    p.add_argument("--to", choices=FORMATS, help="convert to this format")
    p.add_argument("--out", help="output path for conversion")

    p = sub.add_parser("cluster", help="reduce and cluster, writing a manifest")
    _add_input_args(p)
    _add_common_pipeline_args(p)
    p.add_argument("--method", choices=["gmm", "dbscan"], default="gmm")
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=15)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--min-pts", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--evaluate", action="store_true", help="evaluate against labels")

    p = sub.add_parser("sort", help="reduce and compute the 1D similarity ordering")
    _add_input_args(p)
    _add_common_pipeline_args(p)
    p.add_argument("--perplexity", type=float, default=30.0)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("eval", help="evaluate a manifest's clustering against labels")
    p.add_argument("--manifest", required=True)
    p.add_argument(
        "--labels",
        help="JSON-lines (item_id, label) sidecar; defaults to manifest item labels",
    )
    p.add_argument("--out", help="write the updated manifest here")

    p = sub.add_parser("run", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True, help="pipeline config (JSON)")
    p.add_argument("--output-dir", help="override config output_dir")
    p.add_argument("--seed", type=int, help="override clustering/ordering seeds")

    p = sub.add_parser("render", help="print a manifest's report tables")
    p.add_argument("--manifest", required=True)
    return parser


def _add_input_args(p: argparse.ArgumentParser):
    p.add_argument("--input", required=True, help="embedding file")
    p.add_argument("--format", choices=FORMATS, default="csv")


def _add_common_pipeline_args(p: argparse.ArgumentParser):
    p.add_argument("--output-dir", required=True)
    p.add_argument(
        "--no-normalize",
        action="store_true",
        help="skip L2 normalization of the embeddings",
    )
    p.add_argument(
        "--reduction", choices=["none", "pca", "umap"], default="none"
    )
    p.add_argument("--pca-q", type=int, default=50)
    p.add_argument("--umap-dim", type=int, default=10)
    p.add_argument("--umap-neighbors", type=int, default=15)
    p.add_argument("--umap-min-dist", type=float, default=0.1)
    p.add_argument("--umap-epochs", type=int, default=300)
    p.add_argument("--umap-seed", type=int, default=0)


def _reduction_config(args) -> dict:
    if args.reduction == "none":
        return {"method": "none"}
    if args.reduction == "pca":
        return {"method": "pca", "q": args.pca_q}
    return {
        "method": "umap",
        "output_dim": args.umap_dim,
        "n_neighbors": args.umap_neighbors,
        "min_dist": args.umap_min_dist,
        "n_epochs": args.umap_epochs,
        "seed": args.umap_seed,
    }


def cmd_ingest(args) -> int:
    m = load_embeddings(args.input, args.format)
    labeled = sum(1 for it in m.items if it.label is not None)
    print(f"{args.input}: N={m.n}, d={m.dim}, labeled={labeled}/{m.n}")
    if args.to:
        if not args.out:
            print("error: --to requires --out", file=sys.stderr)
            return 2
        save_embeddings(m, args.out, args.to)
        print(f"wrote {args.out} ({args.to})")
    return 0


def cmd_cluster(args) -> int:
    if args.method == "gmm":
        cluster = {
            "method": "gmm",
            "k_min": args.k_min,
            "k_max": args.k_max,
            "seed": args.seed,
        }
    else:
        cluster = {"method": "dbscan", "eps": args.eps, "min_pts": args.min_pts}
    config = {
        "input": {"path": args.input, "format": args.format},
        "normalize": not args.no_normalize,
        "reduction": _reduction_config(args),
        "cluster": cluster,
        "evaluate": args.evaluate,
        "output_dir": args.output_dir,
    }
    manifest = run_pipeline(config)
    _print_summary(manifest)
    return 0


def cmd_sort(args) -> int:
    config = {
        "input": {"path": args.input, "format": args.format},
        "normalize": not args.no_normalize,
        "reduction": _reduction_config(args),
        "ordering": {"perplexity": args.perplexity, "seed": args.seed, "runs": args.runs},
        "output_dir": args.output_dir,
    }
    manifest = run_pipeline(config)
    _print_summary(manifest)
    return 0


def cmd_eval(args) -> int:
    manifest = load_manifest(args.manifest)
    if not manifest.get("clustering"):
        print("error: manifest has no clustering section", file=sys.stderr)
        return 2
    if args.labels:
        mapping = load_labels_sidecar(args.labels)
        labels = [mapping.get(it["id"]) for it in manifest["items"]]
        counts: dict[str, int] = {}
        for lab in labels:
            if lab is not None:
                counts[lab] = counts.get(lab, 0) + 1
        print("label counts: " + json.dumps(counts, sort_keys=True))
    else:
        labels = [it["label"] for it in manifest["items"]]
    if any(lab is None for lab in labels):
        print("error: evaluation requires labels for every item", file=sys.stderr)
        return 2
    assignment = HardAssignment.from_dict(manifest["clustering"]["assignment"])
    report = evaluate(assignment, labels)
    manifest["evaluation"] = report.to_dict()
    print(render_tables(manifest))
    if args.out:
        write_manifest(manifest, Path(args.out))
    return 0


def cmd_run(args) -> int:
    config = json.loads(Path(args.config).read_text())
    if args.output_dir:
        config["output_dir"] = args.output_dir
    if args.seed is not None:
        if config.get("cluster"):
            config["cluster"]["seed"] = args.seed
        if config.get("ordering"):
            config["ordering"]["seed"] = args.seed
    manifest = run_pipeline(config)
    _print_summary(manifest)
    return 0


def cmd_render(args) -> int:
    manifest = load_manifest(args.manifest)
    print(render_tables(manifest))
    return 0


def _print_summary(manifest: dict):
    out_dir = manifest["config"]["output_dir"]
    line = f"manifest written to {out_dir}/manifest.json (N={manifest['dataset']['n']})"
    clustering = manifest.get("clustering")
    if clustering and clustering.get("bic_report"):
        line += f", selected_k={clustering['bic_report']['selected_k']}"
    if manifest.get("evaluation"):
        ev = manifest["evaluation"]
        line += f", accuracy={ev['accuracy']:.3f}, macro_f1={ev['macro_f1']:.3f}"
    print(line)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "ingest": cmd_ingest,
        "cluster": cmd_cluster,
        "sort": cmd_sort,
        "eval": cmd_eval,
        "run": cmd_run,
        "render": cmd_render,
    }
    try:
        return handlers[args.command](args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
