import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from reflecta.quadric import Ellipsoid, ProjHyperplane, ProjLine

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_orthogonal(n, rng):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_ellipsoid(n, rng, spread=(0.5, 3.0)):
    """Centered ellipsoid with well-separated random semi-axes."""
    axes = np.sort(rng.uniform(*spread, size=n))
    while np.min(np.diff(axes)) < 0.05:
        axes = np.sort(rng.uniform(*spread, size=n))
    return Ellipsoid.from_axes(axes, random_orthogonal(n, rng))


def random_spd(n, rng):
    B = rng.standard_normal((n, n))
    return B @ B.T + 0.5 * np.eye(n)


@st.composite
def ellipsoids(draw, dims=(2, 6)):
    n = draw(st.integers(*dims))
    rng = np.random.default_rng(draw(seeds))
    return random_ellipsoid(n, rng)


@st.composite
def ellipsoid_and_line(draw, dims=(2, 6)):
    E = draw(ellipsoids(dims))
    rng = np.random.default_rng(draw(seeds))
    return E, ProjLine.from_vector(rng.standard_normal(E.n))


@st.composite
def ellipsoid_and_hyperplane(draw, dims=(3, 6)):
    E = draw(ellipsoids(dims))
    rng = np.random.default_rng(draw(seeds))
    return E, ProjHyperplane.from_normal(rng.standard_normal(E.n))


@pytest.fixture
def tri():
    return Ellipsoid.diagonal([1.0, 1 / 4, 1 / 9])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
