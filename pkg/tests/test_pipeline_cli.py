import json

import numpy as np
import pytest

from wildsort import FixtureSpec, generate
from wildsort.cli import main
from wildsort.data import save_embeddings
from wildsort.pipeline import (
    PipelineError,
    load_manifest,
    resolve_config,
    resolve_output_dir,
    run_pipeline,
    validate_manifest,
)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    m = generate(FixtureSpec(3, 30, 6, 8.0, seed=2))
    path = root / "blobs.csv"
    save_embeddings(m, path, "csv")
    unlabeled = root / "blobs_unlabeled.csv"
    save_embeddings(m.without_labels(), unlabeled, "csv")
    return {"matrix": m, "csv": path, "unlabeled_csv": unlabeled}


def cluster_config(dataset, out_dir, **extra):
    config = {
        "input": {"path": str(dataset["csv"]), "format": "csv"},
        "output_dir": str(out_dir),
        "reduction": {"method": "pca", "q": 4},
        "cluster": {"method": "gmm", "k_min": 2, "k_max": 5, "seed": 0},
    }
    config.update(extra)
    return config


def test_manifest_deterministic_bytes(dataset, tmp_path):
    ts = "2024-01-01T00:00:00+00:00"
    out = tmp_path / "out"
    config = cluster_config(dataset, out, evaluate=True)
    run_pipeline(config, timestamp=ts)
    first = (out / "manifest.json").read_bytes()
    run_pipeline(config, timestamp=ts)
    assert (out / "manifest.json").read_bytes() == first


def test_manifest_schema_and_contents(dataset, tmp_path):
    manifest = run_pipeline(cluster_config(dataset, tmp_path / "out", evaluate=True))
    validate_manifest(manifest)
    assert manifest["schema"] == 1
    assert manifest["dataset"]["n"] == 90
    assert manifest["clustering"]["bic_report"]["selected_k"] == 3
    assert manifest["evaluation"]["accuracy"] >= 0.98
    assert len(manifest["items"]) == 90
    loaded = load_manifest(tmp_path / "out" / "manifest.json")
    assert loaded["clustering"] == manifest["clustering"]


def test_labels_are_inert(dataset, tmp_path):
    labeled = run_pipeline(cluster_config(dataset, tmp_path / "l"))
    config = cluster_config(dataset, tmp_path / "u")
    config["input"]["path"] = str(dataset["unlabeled_csv"])
    unlabeled = run_pipeline(config)
    assert labeled["clustering"]["assignment"] == unlabeled["clustering"]["assignment"]


def test_eval_requires_labels(dataset, tmp_path):
    config = cluster_config(dataset, tmp_path / "out", evaluate=True)
    config["input"]["path"] = str(dataset["unlabeled_csv"])
    with pytest.raises(PipelineError, match="eval"):
        run_pipeline(config)
    assert not (tmp_path / "out" / "manifest.json").exists()


def test_eval_requires_clustering(dataset, tmp_path):
    config = cluster_config(dataset, tmp_path / "out", evaluate=True)
    config["cluster"] = None
    with pytest.raises(PipelineError, match="eval"):
        run_pipeline(config)


def test_reduction_cache_reuse(dataset, tmp_path):
    out = tmp_path / "out"
    first = run_pipeline(cluster_config(dataset, out))
    key = first["reduction"]["cache_key"]
    cache_file = out / ".cache" / f"reduce_{key}.npz"
    assert cache_file.exists()
    # poison the cache with two far-apart blobs; a second run must read it
    # rather than recompute, so the BIC sweep now picks k=2
    fake = np.random.default_rng(0).standard_normal((90, 4))
    fake[45:] += 50.0
    np.savez(cache_file, coords=fake)
    second = run_pipeline(cluster_config(dataset, out))
    assert second["reduction"]["cache_key"] == key
    assert second["clustering"]["bic_report"]["selected_k"] == 2


def test_ordering_stage(dataset, tmp_path):
    config = {
        "input": {"path": str(dataset["csv"]), "format": "csv"},
        "output_dir": str(tmp_path / "out"),
        "ordering": {"perplexity": 10.0, "seed": 0, "runs": 2, "iterations": 150},
    }
    manifest = run_pipeline(config)
    ordering = manifest["ordering"]
    assert len(ordering["runs"]) == 2
    assert sorted(ordering["runs"][0]["permutation"]) == list(range(90))
    agg = ordering["aggregate_coherence"]
    assert agg["runs"] == 2
    assert agg["seeds"] == [0, 1]
    assert 0.0 < agg["overall_mean"] <= 100.0
    assert manifest["seeds"]["ordering"] == [0, 1]
    tables = (tmp_path / "out" / "tables.txt").read_text()
    assert "coherence" in tables


def test_resolve_config_defaults(dataset):
    cfg = resolve_config({"input": {"path": dataset["csv"]}, "output_dir": "/tmp/x"})
    assert cfg["normalize"] is True
    assert cfg["reduction"] == {"method": "none"}
    assert cfg["cluster"] is None
    assert isinstance(cfg["input"]["path"], str)


def test_resolve_config_errors(dataset):
    with pytest.raises(ValueError):
        resolve_config({"output_dir": "/tmp/x"})
    with pytest.raises(ValueError):
        resolve_config(
            {"input": {"path": "x"}, "output_dir": "y", "reduction": {"method": "lda"}}
        )
    with pytest.raises(ValueError):
        resolve_config(
            {"input": {"path": "x"}, "output_dir": "y", "cluster": {"method": "kmeans"}}
        )


def test_resolve_output_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv("WILDSORT_OUTPUT_ROOT", str(tmp_path))
    assert resolve_output_dir("rel") == tmp_path / "rel"
    assert resolve_output_dir("/abs/path") == resolve_output_dir("/abs/path")
    monkeypatch.delenv("WILDSORT_OUTPUT_ROOT")
    assert resolve_output_dir("rel").name == "rel"


def test_validate_manifest_rejects_garbage():
    with pytest.raises(Exception):
        validate_manifest({"schema": 1})


def test_cli_ingest_and_convert(dataset, tmp_path, capsys):
    out = tmp_path / "conv.jsonl"
    rc = main(
        ["ingest", "--input", str(dataset["csv"]), "--to", "jsonl", "--out", str(out)]
    )
    assert rc == 0
    captured = capsys.readouterr().out
    assert "N=90" in captured and "d=6" in captured
    assert out.exists()


def test_cli_ingest_bad_file(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("item_id,label,dim_0\nx,,not_a_number\n")
    rc = main(["ingest", "--input", str(bad)])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_cli_cluster_and_render(dataset, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(
        [
            "cluster",
            "--input", str(dataset["csv"]),
            "--output-dir", str(out),
            "--reduction", "pca",
            "--pca-q", "4",
            "--k-min", "2",
            "--k-max", "5",
            "--evaluate",
        ]
    )
    assert rc == 0
    summary = capsys.readouterr().out
    assert "selected_k=3" in summary
    rc = main(["render", "--manifest", str(out / "manifest.json")])
    assert rc == 0
    assert "F1" in capsys.readouterr().out


def test_cli_eval_with_labels_sidecar(dataset, tmp_path, capsys):
    out = tmp_path / "out"
    main(
        [
            "cluster",
            "--input", str(dataset["unlabeled_csv"]),
            "--output-dir", str(out),
            "--reduction", "pca",
            "--pca-q", "4",
            "--k-max", "5",
        ]
    )
    capsys.readouterr()
    sidecar = tmp_path / "labels.jsonl"
    with open(sidecar, "w") as fh:
        for item in dataset["matrix"].items:
            fh.write(json.dumps({"id": item.item_id, "label": item.label}) + "\n")
    updated = tmp_path / "evaluated.json"
    rc = main(
        [
            "eval",
            "--manifest", str(out / "manifest.json"),
            "--labels", str(sidecar),
            "--out", str(updated),
        ]
    )
    assert rc == 0
    output = capsys.readouterr().out
    assert 'label counts: {"cluster_0": 30, "cluster_1": 30, "cluster_2": 30}' in output
    assert "Accuracy" in output
    evaluated = load_manifest(updated)
    assert evaluated["evaluation"]["accuracy"] >= 0.98


def test_cli_eval_missing_labels(dataset, tmp_path, capsys):
    out = tmp_path / "out"
    main(
        [
            "cluster",
            "--input", str(dataset["unlabeled_csv"]),
            "--output-dir", str(out),
            "--reduction", "pca",
            "--pca-q", "4",
            "--k-max", "5",
        ]
    )
    capsys.readouterr()
    rc = main(["eval", "--manifest", str(out / "manifest.json")])
    assert rc == 2
    assert "requires labels" in capsys.readouterr().err


def test_cli_sort(dataset, tmp_path, capsys):
    rc = main(
        [
            "sort",
            "--input", str(dataset["csv"]),
            "--output-dir", str(tmp_path / "out"),
            "--perplexity", "10",
            "--runs", "1",
        ]
    )
    assert rc == 0
    manifest = load_manifest(tmp_path / "out" / "manifest.json")
    assert manifest["ordering"]["aggregate_coherence"]["runs"] == 1


def test_cli_run_with_config_file(dataset, tmp_path, capsys):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(cluster_config(dataset, tmp_path / "out")))
    rc = main(["run", "--config", str(config_path), "--seed", "3"])
    assert rc == 0
    manifest = load_manifest(tmp_path / "out" / "manifest.json")
    assert manifest["config"]["cluster"]["seed"] == 3
