import numpy as np
import pytest

from wildsort import FixtureSpec, generate
from wildsort.fixtures import true_centroids


def test_contract_shapes_and_labels():
    spec = FixtureSpec(4, 25, 8, 6.0, seed=1)
    m = generate(spec)
    assert m.n == 100
    assert m.dim == 8
    labels = m.labels
    for c in range(4):
        assert labels[25 * c : 25 * (c + 1)] == (f"cluster_{c}",) * 25
    assert len(set(m.item_ids)) == 100


def test_deterministic():
    spec = FixtureSpec(3, 30, 6, 5.0, seed=9)
    a, b = generate(spec), generate(spec)
    assert np.array_equal(a.vectors, b.vectors)
    assert a.labels == b.labels


def test_seed_changes_data():
    a = generate(FixtureSpec(3, 30, 6, 5.0, seed=1))
    b = generate(FixtureSpec(3, 30, 6, 5.0, seed=2))
    assert not np.array_equal(a.vectors, b.vectors)


def test_centroid_pairwise_separation_exact():
    spec = FixtureSpec(5, 10, 10, 8.0, seed=3)
    c = true_centroids(spec)
    for i in range(5):
        for j in range(i + 1, 5):
            assert np.linalg.norm(c[i] - c[j]) == pytest.approx(8.0, abs=1e-9)


def test_nearest_centroid_recovers_labels():
    spec = FixtureSpec(5, 200, 10, 8.0, seed=13)
    m = generate(spec)
    c = true_centroids(spec)
    d = np.linalg.norm(m.vectors[:, None, :] - c[None, :, :], axis=-1)
    nearest = d.argmin(axis=1)
    truth = np.repeat(np.arange(5), 200)
    assert np.mean(nearest == truth) >= 0.999


def test_empirical_cluster_means():
    spec = FixtureSpec(3, 400, 12, 8.0, seed=5)
    m = generate(spec)
    c = true_centroids(spec)
    for i in range(3):
        block = m.vectors[400 * i : 400 * (i + 1)]
        # sigma is the cluster RMS radius (1.0 here), so the mean error
        # norm concentrates near sigma/sqrt(n)
        err = np.linalg.norm(block.mean(axis=0) - c[i])
        assert err < 6.0 / np.sqrt(400)


def test_rms_radius_convention():
    spec = FixtureSpec(2, 2000, 16, 8.0, seed=8)
    m = generate(spec)
    c = true_centroids(spec)
    block = m.vectors[:2000]
    rms = np.sqrt(np.mean(np.sum((block - c[0]) ** 2, axis=1)))
    assert rms == pytest.approx(1.0, abs=0.05)


def test_anisotropy_scales_clusters():
    spec = FixtureSpec(2, 2000, 16, 20.0, seed=4, anisotropy=(0.5, 2.0))
    m = generate(spec)
    c = true_centroids(spec)
    radii = []
    for i in range(2):
        block = m.vectors[2000 * i : 2000 * (i + 1)]
        radii.append(np.sqrt(np.mean(np.sum((block - c[i]) ** 2, axis=1))))
    for r in radii:
        assert 0.4 < r < 2.2


def test_single_cluster_at_origin():
    spec = FixtureSpec(1, 50, 4, 3.0, seed=0)
    assert np.allclose(true_centroids(spec), 0.0)
    m = generate(spec)
    assert m.n == 50


def test_invalid_specs():
    with pytest.raises(ValueError):
        FixtureSpec(0, 10, 5, 3.0, seed=0)
    with pytest.raises(ValueError):
        FixtureSpec(2, 10, 5, 0.0, seed=0)
    with pytest.raises(ValueError):
        FixtureSpec(7, 10, 5, 3.0, seed=0)  # dim < n_clusters - 1
