"""Post-hoc evaluation of hard assignments against ground-truth species.

Clusters carry no names, so metrics first need a one-to-one cluster->species
correspondence; we use the optimal matching that maximizes total agreement
(rectangular when cluster and species counts differ). Per-species F1 and
the unweighted macro average follow the usual precision/recall definitions,
with density-clustering noise counted as unassigned (false negatives only).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .assignments import NOISE, HardAssignment


@dataclass(frozen=True)
class ConfusionMatrix:
    """Species x matched-cluster counts, plus items outside the matched set."""

    species: tuple[str, ...]
    counts: np.ndarray = field(repr=False)  # S x S, counts[i][j] per matched cluster
    unmatched_cluster_counts: dict[str, int] = field(default_factory=dict)
    noise_counts: dict[str, int] = field(default_factory=dict)

    def row_total(self, s: str) -> int:
        i = self.species.index(s)
        return (
            int(self.counts[i].sum())
            + self.unmatched_cluster_counts.get(s, 0)
            + self.noise_counts.get(s, 0)
        )

    def to_dict(self) -> dict:
        return {
            "species": list(self.species),
            "counts": self.counts.tolist(),
            "unmatched_cluster_counts": dict(self.unmatched_cluster_counts),
            "noise_counts": dict(self.noise_counts),
        }


@dataclass(frozen=True)
class SpeciesMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalReport:
    confusion: ConfusionMatrix
    per_species: dict[str, SpeciesMetrics]
    macro_f1: float
    accuracy: float
    assignment: dict[int, str]  # cluster id -> species

    def to_dict(self) -> dict:
        return {
            "confusion": self.confusion.to_dict(),
            "per_species": {
                s: {"precision": m.precision, "recall": m.recall, "f1": m.f1}
                for s, m in self.per_species.items()
            },
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "assignment": {str(c): s for c, s in self.assignment.items()},
        }


def contingency_table(
    assignment: HardAssignment, labels: Sequence[Optional[str]]
) -> tuple[tuple[str, ...], np.ndarray, dict[str, int]]:
    """(species, S x k counts, per-species noise counts); noise excluded
    from every cluster column."""
    _check_labels(assignment, labels)
    species = tuple(sorted(set(labels)))
    s_index = {s: i for i, s in enumerate(species)}
    table = np.zeros((len(species), assignment.k), dtype=np.int64)
    noise: dict[str, int] = {}
    for cluster, label in zip(assignment.cluster_of, labels):
        if cluster == NOISE:
            noise[label] = noise.get(label, 0) + 1
        else:
            table[s_index[label], cluster] += 1
    return species, table, noise


def match_clusters(
    assignment: HardAssignment, labels: Sequence[Optional[str]]
) -> dict[int, str]:
    """Optimal one-to-one cluster->species mapping maximizing total agreement.

    Surplus clusters (when k exceeds the species count) stay unmatched;
    their members become false negatives for their true species.
    """
    species, table, _ = contingency_table(assignment, labels)
    if assignment.k == 0:
        raise ValueError("assignment contains no clusters")
    rows, cols = linear_sum_assignment(table, maximize=True)
    return {int(c): species[r] for r, c in zip(rows, cols)}


def evaluate(assignment: HardAssignment, labels: Sequence[Optional[str]]) -> EvalReport:
    """Confusion matrix under optimal matching, per-species P/R/F1, macro-F1,
    and accuracy (total matched diagonal over N)."""
    species, table, noise = contingency_table(assignment, labels)
    mapping = match_clusters(assignment, labels)
    cluster_of_species = {s: c for c, s in mapping.items()}
    s_count = len(species)

    counts = np.zeros((s_count, s_count), dtype=np.int64)
    unmatched: dict[str, int] = {}
    matched_clusters = set(mapping)
    for i, s in enumerate(species):
        for c in range(assignment.k):
            if c in matched_clusters:
                j = species.index(mapping[c])
                counts[i, j] += table[i, c]
            elif table[i, c]:
                unmatched[s] = unmatched.get(s, 0) + int(table[i, c])

    confusion = ConfusionMatrix(species, counts, unmatched, noise)
    n_total = len(labels)

    per_species: dict[str, SpeciesMetrics] = {}
    total_tp = 0
    for i, s in enumerate(species):
        c = cluster_of_species.get(s)
        if c is None:
            tp = 0
            fp = 0
        else:
            tp = int(table[i, c])
            fp = int(table[:, c].sum()) - tp
        total = confusion.row_total(s)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / total if total else 0.0
        f1 = (
            2.0 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        per_species[s] = SpeciesMetrics(precision, recall, f1)
        total_tp += tp

    macro_f1 = float(np.mean([m.f1 for m in per_species.values()]))
    accuracy = total_tp / n_total
    return EvalReport(confusion, per_species, macro_f1, accuracy, mapping)


def matched_accuracy(assignment: HardAssignment, labels: Sequence[Optional[str]]) -> float:
    """Fraction of items landing in the cluster matched to their species."""
    return evaluate(assignment, labels).accuracy


def _check_labels(assignment: HardAssignment, labels: Sequence[Optional[str]]):
    if len(labels) != assignment.n:
        raise ValueError(
            f"{len(labels)} labels for {assignment.n} assigned items"
        )
    for i, lab in enumerate(labels):
        if lab is None:
            raise ValueError(f"item {i} is unlabeled; evaluation requires labels")
