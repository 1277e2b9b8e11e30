from itertools import permutations

import numpy as np
import pytest

from wildsort import HardAssignment, evaluate, match_clusters, matched_accuracy
from wildsort.assignments import NOISE
from wildsort.evaluation import contingency_table

# Published five-species confusion counts used as a fixed regression case.
TABLE = {
    "badger": [93, 7, 0, 0, 0],
    "raccoon dog": [31, 61, 4, 0, 4],
    "red fox": [0, 2, 95, 3, 0],
    "polecat": [0, 0, 9, 91, 0],
    "hooded crow": [0, 1, 0, 0, 99],
}


def assignment_from_table(table):
    labels = []
    clusters = []
    for species, row in table.items():
        for cluster, count in enumerate(row):
            labels.extend([species] * count)
            clusters.extend([cluster] * count)
    k = max(clusters) + 1
    return HardAssignment(np.array(clusters), k), labels


def test_published_table_metrics():
    assignment, labels = assignment_from_table(TABLE)
    report = evaluate(assignment, labels)
    assert report.per_species["badger"].f1 == pytest.approx(186 / 224, abs=1e-12)
    assert report.per_species["raccoon dog"].f1 == pytest.approx(122 / 171, abs=1e-12)
    assert report.per_species["red fox"].f1 == pytest.approx(190 / 208, abs=1e-12)
    assert report.per_species["polecat"].f1 == pytest.approx(182 / 194, abs=1e-12)
    assert report.per_species["hooded crow"].f1 == pytest.approx(198 / 203, abs=1e-12)
    expected_macro = np.mean([186 / 224, 122 / 171, 190 / 208, 182 / 194, 198 / 203])
    assert report.macro_f1 == pytest.approx(expected_macro, abs=1e-12)
    assert report.accuracy == pytest.approx(439 / 500, abs=1e-12)
    # diagonal matching: cluster c -> the species whose row peaks there
    assert report.assignment == {
        0: "badger",
        1: "raccoon dog",
        2: "red fox",
        3: "polecat",
        4: "hooded crow",
    }


def test_perfect_diagonal():
    assignment, labels = assignment_from_table(
        {"a": [50, 0], "b": [0, 30]}
    )
    report = evaluate(assignment, labels)
    for m in report.per_species.values():
        assert m.precision == m.recall == m.f1 == 1.0
    assert report.macro_f1 == 1.0
    assert report.accuracy == 1.0


def test_single_cluster_degenerate():
    labels = [f"s{i}" for i in range(5) for _ in range(100)]
    assignment = HardAssignment(np.zeros(500, dtype=int), 1)
    report = evaluate(assignment, labels)
    # one species matched: precision 0.2, recall 1 -> F1 1/3; rest 0
    f1s = sorted(m.f1 for m in report.per_species.values())
    assert f1s[:4] == [0.0, 0.0, 0.0, 0.0]
    assert f1s[4] == pytest.approx(1 / 3)
    assert report.macro_f1 == pytest.approx(1 / 15)
    assert report.accuracy == pytest.approx(0.2)


def exhaustive_best_agreement(table):
    """Max total diagonal over all one-to-one cluster->species pairings."""
    s, k = table.shape
    size = max(s, k)
    padded = np.zeros((size, size), dtype=np.int64)
    padded[:s, :k] = table
    return max(
        sum(padded[r, c] for r, c in enumerate(perm))
        for perm in permutations(range(size))
    )


def test_matching_exhaustive_oracle(rng):
    for _ in range(100):
        s = int(rng.integers(2, 6))
        k = int(rng.integers(1, 7))
        counts = rng.integers(0, 20, size=(s, k))
        labels = []
        clusters = []
        for i in range(s):
            for j in range(k):
                labels.extend([f"s{i}"] * counts[i, j])
                clusters.extend([j] * counts[i, j])
        if not labels:
            continue
        # make sure every cluster id < k is representable
        assignment = HardAssignment(np.array(clusters, dtype=int), k)
        species, table, _ = contingency_table(assignment, labels)
        mapping = match_clusters(assignment, labels)
        achieved = sum(
            table[species.index(sp), c] for c, sp in mapping.items()
        )
        assert achieved == exhaustive_best_agreement(table)


def test_rectangular_surplus_clusters():
    # 6 clusters, 5 species: one cluster stays unmatched and its members
    # count only as false negatives
    table = {
        "a": [40, 0, 0, 0, 0, 10],
        "b": [0, 40, 0, 0, 0, 0],
        "c": [0, 0, 40, 0, 0, 0],
        "d": [0, 0, 0, 40, 0, 0],
        "e": [0, 0, 0, 0, 40, 0],
    }
    assignment, labels = assignment_from_table(table)
    report = evaluate(assignment, labels)
    assert set(report.assignment.values()) == {"a", "b", "c", "d", "e"}
    assert 5 not in report.assignment
    a = report.per_species["a"]
    assert a.precision == 1.0
    assert a.recall == pytest.approx(0.8)
    assert report.confusion.unmatched_cluster_counts == {"a": 10}


def test_noise_is_false_negative_only():
    clusters = [0] * 40 + [NOISE] * 10 + [1] * 50
    labels = ["x"] * 50 + ["y"] * 50
    report = evaluate(HardAssignment(np.array(clusters), 2), labels)
    x = report.per_species["x"]
    assert x.precision == 1.0  # noise never pollutes a cluster
    assert x.recall == pytest.approx(0.8)
    assert report.confusion.noise_counts == {"x": 10}
    assert report.accuracy == pytest.approx(0.9)


def test_cluster_relabel_invariance(rng):
    clusters = rng.integers(0, 4, size=120)
    labels = [f"s{v}" for v in rng.integers(0, 4, size=120)]
    a = evaluate(HardAssignment(clusters, 4), labels)
    perm = rng.permutation(4)
    b = evaluate(HardAssignment(perm[clusters], 4), labels)
    assert a.macro_f1 == pytest.approx(b.macro_f1, abs=1e-12)
    assert a.accuracy == pytest.approx(b.accuracy, abs=1e-12)
    for s in a.per_species:
        assert a.per_species[s].f1 == pytest.approx(b.per_species[s].f1, abs=1e-12)


def test_recall_times_total_is_tp(rng):
    clusters = rng.integers(0, 3, size=90)
    labels = [f"s{v}" for v in rng.integers(0, 3, size=90)]
    report = evaluate(HardAssignment(clusters, 3), labels)
    for s, m in report.per_species.items():
        total = report.confusion.row_total(s)
        tp = m.recall * total
        assert tp == pytest.approx(round(tp), abs=1e-9)


def test_matched_accuracy_consistency(rng):
    clusters = rng.integers(0, 3, size=60)
    labels = [f"s{v}" for v in rng.integers(0, 3, size=60)]
    assignment = HardAssignment(clusters, 3)
    assert matched_accuracy(assignment, labels) == evaluate(assignment, labels).accuracy


def test_label_errors():
    assignment = HardAssignment(np.array([0, 0, 1]), 2)
    with pytest.raises(ValueError):
        evaluate(assignment, ["a", "b"])
    with pytest.raises(ValueError):
        evaluate(assignment, ["a", None, "b"])
