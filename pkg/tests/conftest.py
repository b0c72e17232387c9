import numpy as np
import pytest

from alsi import IncidenceMatrix


def random_incidence(rng, n, p, density=0.5) -> IncidenceMatrix:
    """Random binary incidence matrix with no zero-norm columns."""
    x = (rng.uniform(size=(n, p)) < density).astype(float)
    for j in range(p):
        if x[:, j].sum() == 0:
            x[rng.integers(n), j] = 1.0
    return IncidenceMatrix(experiments=[f"e{i}" for i in range(n)],
                           genes=[f"g{j}" for j in range(p)],
                           x=x, expression_threshold=0.0)


def random_psd(rng, p, rank=None):
    rank = rank or p
    a = rng.standard_normal((p, rank))
    return a @ a.T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
