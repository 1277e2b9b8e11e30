"""1D similarity ordering and the run-coherence metric.

Coherence of a species is its longest contiguous run in the sorted
sequence over its total count, as a percentage. Multi-run aggregation
reports mean +/- sample std across independently seeded projections.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .lowdim import LowDimEmbedding
from .tsne import TsneEmbedder
from .validation import check_matrix


@dataclass(frozen=True)
class Ordering:
    """Item indices sorted ascending by 1D coordinate (ties by item_id)."""

    permutation: tuple[int, ...]
    coordinates: tuple[float, ...]
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "permutation": list(self.permutation),
            "coordinates": list(self.coordinates),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SpeciesCoherence:
    max_run_length: int
    total_count: int
    coherence_pct: float


@dataclass(frozen=True)
class CoherenceReport:
    per_species: dict[str, SpeciesCoherence]
    overall_pct: float

    def to_dict(self) -> dict:
        return {
            "per_species": {
                s: {
                    "max_run_length": c.max_run_length,
                    "total_count": c.total_count,
                    "coherence_pct": c.coherence_pct,
                }
                for s, c in self.per_species.items()
            },
            "overall_pct": self.overall_pct,
        }


@dataclass(frozen=True)
class AggregateCoherence:
    runs: int
    seeds: tuple[int, ...]
    per_species_mean: dict[str, float]
    per_species_std: dict[str, Optional[float]]
    overall_mean: float
    overall_std: Optional[float]

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "seeds": list(self.seeds),
            "per_species_mean": dict(self.per_species_mean),
            "per_species_std": dict(self.per_species_std),
            "overall_mean": self.overall_mean,
            "overall_std": self.overall_std,
        }


def sort_1d(embedding: LowDimEmbedding, item_ids: Optional[Sequence[str]] = None) -> Ordering:
    """Stable ascending sort of a 1D embedding; coordinate ties break by
    item_id ascending (by index when ids are absent)."""
    if embedding.output_dim != 1:
        raise ValueError(f"expected a 1D embedding, got output_dim={embedding.output_dim}")
    coords = embedding.coords[:, 0]
    n = coords.shape[0]
    if item_ids is None:
        keys = [str(i) for i in range(n)]
    else:
        if len(item_ids) != n:
            raise ValueError(f"{len(item_ids)} item_ids for {n} coordinates")
        keys = [str(k) for k in item_ids]
    perm = sorted(range(n), key=lambda i: (coords[i], keys[i]))
    seed = embedding.config.get("seed") if embedding.config else None
    return Ordering(tuple(perm), tuple(float(coords[i]) for i in perm), seed)


def max_run_lengths(sequence: Sequence[str]) -> dict[str, int]:
    """Longest contiguous run per label in one linear scan."""
    best: dict[str, int] = {}
    current_label = None
    current_len = 0
    for label in sequence:
        if label == current_label:
            current_len += 1
        else:
            current_label = label
            current_len = 1
        if current_len > best.get(label, 0):
            best[label] = current_len
    return best


def coherence(ordering: Ordering, labels: Sequence[Optional[str]]) -> CoherenceReport:
    """Per-species run coherence of the ordered sequence; overall is the
    count-weighted mean."""
    if len(labels) != len(ordering.permutation):
        raise ValueError(f"{len(labels)} labels for {len(ordering.permutation)} items")
    for i, lab in enumerate(labels):
        if lab is None:
            raise ValueError(f"item {i} is unlabeled; coherence requires labels")
    seq = [labels[i] for i in ordering.permutation]
    runs = max_run_lengths(seq)
    totals: dict[str, int] = {}
    for lab in seq:
        totals[lab] = totals.get(lab, 0) + 1
    per_species = {
        s: SpeciesCoherence(runs[s], totals[s], 100.0 * runs[s] / totals[s])
        for s in sorted(totals)
    }
    overall = 100.0 * sum(runs[s] for s in totals) / len(seq)
    return CoherenceReport(per_species, overall)


def aggregate_runs(
    m,
    labels: Sequence[Optional[str]],
    embedder: TsneEmbedder,
    runs: int,
    item_ids: Optional[Sequence[str]] = None,
) -> AggregateCoherence:
    """Project to 1D `runs` times with seeds seed+0..runs-1 and aggregate
    coherence (sample std, n-1 denominator; std omitted for a single run)."""
    X = check_matrix(m, "m")
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    base_seed = embedder.seed
    reports = []
    seeds = []
    for r in range(runs):
        params = embedder.get_params()
        params["seed"] = base_seed + r
        emb = type(embedder)(**params).fit_transform(X)
        reports.append(coherence(sort_1d(emb, item_ids), labels))
        seeds.append(base_seed + r)

    species = sorted(reports[0].per_species)
    means = {}
    stds = {}
    for s in species:
        vals = np.array([rep.per_species[s].coherence_pct for rep in reports])
        means[s] = float(vals.mean())
        stds[s] = float(vals.std(ddof=1)) if runs >= 2 else None
    overall = np.array([rep.overall_pct for rep in reports])
    return AggregateCoherence(
        runs=runs,
        seeds=tuple(seeds),
        per_species_mean=means,
        per_species_std=stds,
        overall_mean=float(overall.mean()),
        overall_std=float(overall.std(ddof=1)) if runs >= 2 else None,
    )
