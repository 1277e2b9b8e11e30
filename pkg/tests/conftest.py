import numpy as np
import pytest

from wildsort import FixtureSpec, generate


@pytest.fixture(scope="session")
def five_blob_d10():
    """Well-separated 5-cluster fixture: N=500, d=10, separation 8."""
    return generate(FixtureSpec(5, 100, 10, 8.0, seed=7))


@pytest.fixture(scope="session")
def three_blob_d10():
    """Well-separated 3-cluster fixture: N=300, d=10, separation 8."""
    return generate(FixtureSpec(3, 100, 10, 8.0, seed=3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
