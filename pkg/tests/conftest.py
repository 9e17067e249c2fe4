import pytest

from sparsescale.problem import ProblemConfig


@pytest.fixture
def desk_cfg():
    """Default desk-scale configuration p = 2^14, s = 16, sigma = 1, q = 2."""
    return ProblemConfig(2**14, 16, 1.0, 2.0)


@pytest.fixture
def small_cfg():
    return ProblemConfig(1024, 16, 1.0, 2.0)
