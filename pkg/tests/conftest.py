import numpy as np
import pytest

import coricci as c
from coricci import gallery
from coricci.metric import space_from_matrix

# Session-scoped gallery chains: built once, shared read-only (chains are
# immutable), keeping the whole suite fast.


@pytest.fixture(scope="session")
def cube4():
    return gallery.cube(4)


@pytest.fixture(scope="session")
def cube5():
    return gallery.cube(5)


@pytest.fixture(scope="session")
def cube6():
    return gallery.cube(6)


@pytest.fixture(scope="session")
def ou8():
    return gallery.discrete_ou(8)


@pytest.fixture(scope="session")
def binom20():
    return gallery.binomial(20, 0.1)


@pytest.fixture(scope="session")
def binom40():
    return gallery.binomial(40, 2 / 40)


@pytest.fixture(scope="session")
def glauber5():
    return gallery.glauber("cycle:5", 0.2)


@pytest.fixture(scope="session")
def mm60():
    return gallery.mm_infty(3.0, 1.0, 1e-3, K=60)


@pytest.fixture(scope="session")
def reset_chain():
    return gallery.geometric_reset(0.5, K=60)


@pytest.fixture(scope="session")
def two_point_mixing():
    """Both rows equal to (1/2, 1/2): one-step mixing, kappa = 1."""
    space = space_from_matrix([0, 1], [[0.0, 1.0], [1.0, 0.0]])
    return c.build_chain(space, np.full((2, 2), 0.5))


@pytest.fixture(scope="session")
def kappa_cache():
    """Memoized geodesic-scan curvature reports keyed by id(chain)."""
    cache = {}

    def get(chain, eps=1):
        key = (id(chain), eps)
        if key not in cache:
            cache[key] = c.kappa_global(chain, mode="geodesic", eps=eps)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def section5_walk():
    """Nearest-neighbor walk on {0..K} with left probability p = 0.7."""

    def build(p, K=200):
        pts = list(range(K + 1))
        P = np.zeros((K + 1, K + 1))
        P[0, 0] = p
        P[0, 1] = 1 - p
        for k in range(1, K):
            P[k, k - 1] = p
            P[k, k + 1] = 1 - p
        P[K, K - 1] = p
        P[K, K] = 1 - p
        return c.build_chain(gallery._line_space(pts), P)

    return build
