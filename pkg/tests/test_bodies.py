import numpy as np
import pytest

from conftest import random_orthogonal
from reflecta.bodies import (
    BodyOracle,
    body_from_dict,
    box_body,
    convexity_violations,
    ellipsoid_body,
    perturbed_body,
    revolution_body,
    superellipsoid_body,
    validate_profile,
)
from reflecta.errors import ContractViolation, SpecError
from reflecta.quadric import Ellipsoid

PROFILE = [(-1.0, 0.0), (-0.6, 0.8), (0.4, 1.0), (1.0, 0.3)]


def builtins():
    rng = np.random.default_rng(2)
    Q = random_orthogonal(3, rng)
    E = Ellipsoid.from_axes([1.0, 1.5, 2.0], Q, center=np.array([0.3, -0.2, 0.5]))
    return [
        ellipsoid_body(E),
        superellipsoid_body([1.0, 1.5, 2.0], 3.0, [0.1, 0.0, 0.0], Q),
        box_body([1.0, 0.5, 2.0], None, Q),
        revolution_body(PROFILE, axis=(1.0, 1.0, 0.0), center=[0.0, 0.0, 1.0]),
        perturbed_body(E, [[1.5, 0.3, 0.0], [-0.4, 1.2, 0.8]], 0.4),
        ellipsoid_body(Ellipsoid.from_axes([1.0, 2.0, 3.0, 4.0, 5.0], random_orthogonal(5, rng))),
    ]


@pytest.mark.parametrize("K", builtins(), ids=lambda K: f"{K.label}{K.n}")
def test_builtins_convex_and_bounded(K):
    assert convexity_violations(K, pairs=1000, seed=1) == 0
    rng = np.random.default_rng(0)
    g = rng.standard_normal((2000, K.n))
    g /= np.linalg.norm(g, axis=1)[:, None]
    far = K.interior_point + K.bounding_radius * (1.0 + 1e-9 + rng.random(2000))[:, None] * g
    assert not K(far).any()
    assert K(K.interior_point)[0]


@pytest.mark.parametrize("K", builtins(), ids=lambda K: f"{K.label}{K.n}")
def test_spec_roundtrip(K):
    L = body_from_dict(K.spec)
    rng = np.random.default_rng(1)
    pts = K.interior_point + K.bounding_radius * rng.uniform(-1, 1, size=(5000, K.n))
    np.testing.assert_array_equal(K(pts), L(pts))


def test_nonconvex_oracle_is_detected():
    def annulus(x):
        r = np.linalg.norm(x, axis=1)
        return (r <= 1.0) & (r >= 0.5) | (r <= 0.01)

    K = BodyOracle(2, annulus, np.zeros(2), 1.0, "annulus")
    assert convexity_violations(K, pairs=500) > 0


def test_revolution_radius_profile():
    K = revolution_body(PROFILE)
    assert K(np.array([[0.99, 0.0, 0.4]]))[0]
    assert not K(np.array([[1.01, 0.0, 0.4]]))[0]
    assert K(np.array([[0.0, 0.64, 0.7]]))[0]
    assert not K(np.array([[0.0, 0.66, 0.7]]))[0]


def test_profile_validation():
    with pytest.raises(SpecError):
        validate_profile([(0, 1), (1, 0.5), (2, 0.8)])
    with pytest.raises(SpecError):
        validate_profile([(0, 1), (0, 2)])
    with pytest.raises(SpecError):
        validate_profile([(0, -1), (1, 1)])
    z, r = validate_profile(PROFILE)
    assert z.size == 4


def test_spec_errors():
    for bad in [
        {"semi_axes": [1, 2]},
        {"kind": "teapot"},
        {"kind": "box"},
        {"kind": "superellipsoid", "semi_axes": [1, 2], "p": 0.5},
        {"kind": "ellipsoid", "semi_axes": [1, 2], "rotation": [[1, 1], [0, 1]]},
        {"kind": "revolution", "profile": [[0, 1], [1, 2], [2, 0]], "axis": [1, 0]},
    ]:
        with pytest.raises(SpecError):
            body_from_dict(bad)


def test_bad_interior_point():
    with pytest.raises(ContractViolation):
        BodyOracle(2, lambda x: np.zeros(len(x), dtype=bool), np.zeros(2), 1.0)
