import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_orthogonal, seeds
from reflecta.bodies import ellipsoid_body, superellipsoid_body
from reflecta.body import boundary_sample
from reflecta.errors import DegeneratePointSet
from reflecta.mvee import ellipsoid_boundary_points, mvee, relative_form_error
from reflecta.quadric import Ellipsoid, ProjLine, reflection_in_direction


def steiner_by_grid(points, step=0.002):
    """Minimal-area centered ellipse through the points, by brute force over shapes.

    Forms are normalized to ``[[1, b], [b, c]]`` and rescaled so the farthest
    point lies on the boundary; the shape with the largest determinant wins.
    """
    Y = points - points.mean(axis=0)
    b, c = np.meshgrid(np.arange(-2, 2, step), np.arange(step, 4, step), indexing="ij")
    b, c = b.ravel(), c.ravel()
    ok = c > b * b
    b, c = b[ok], c[ok]
    q = np.stack([y[0] ** 2 + 2 * b * y[0] * y[1] + c * y[1] ** 2 for y in Y])
    s = 1.0 / q.max(axis=0)
    best = np.argmax(s * s * (c - b * b))
    return s[best] * np.array([[1.0, b[best]], [b[best], c[best]]])


def test_square_gives_circle():
    fit = mvee(np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float), eps=1e-8)
    np.testing.assert_allclose(fit.ellipsoid.form, np.eye(2) / 2, atol=1e-6)
    np.testing.assert_allclose(fit.ellipsoid.center, 0, atol=1e-6)


def test_boundary_points_recover_form():
    E = Ellipsoid.diagonal([1, 1 / 4, 1 / 9])
    pts = ellipsoid_boundary_points(E, 1000, np.random.default_rng(0))
    fit = mvee(pts)
    assert relative_form_error(fit.ellipsoid.form, E.form) <= 1e-3


def test_triangle_steiner_ellipse():
    tri = np.array([[0, 0], [1, 0], [0, 1]], dtype=float)
    fit = mvee(tri, eps=1e-9)
    oracle = steiner_by_grid(tri)
    np.testing.assert_allclose(fit.ellipsoid.center, [1 / 3, 1 / 3], atol=1e-6)
    assert relative_form_error(fit.ellipsoid.form, oracle) <= 5e-3
    np.testing.assert_allclose(fit.ellipsoid.form, [[3, 1.5], [1.5, 3]], atol=1e-6)


@settings(max_examples=20)
@given(seeds, st.integers(2, 4))
def test_points_are_contained(seed, n):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((50, n)) * rng.uniform(0.1, 3, n)
    fit = mvee(pts, eps=1e-3)
    y = pts - fit.ellipsoid.center
    q = np.einsum("ij,jk,ik->i", y, fit.ellipsoid.form, y)
    assert np.all(q <= 1 + 1e-12)
    assert 0 <= fit.relative_volume_gap <= (1 + 1e-3) ** ((n + 1) / 2) - 1


@settings(max_examples=10)
@given(seeds)
def test_idempotent(seed):
    rng = np.random.default_rng(seed)
    eps = 1e-4
    E = Ellipsoid.from_axes(rng.uniform(0.5, 2.0, 3), random_orthogonal(3, rng), rng.uniform(-1, 1, 3))
    first = mvee(ellipsoid_boundary_points(E, 2000, rng), eps).ellipsoid
    second = mvee(ellipsoid_boundary_points(first, 2000, rng), eps).ellipsoid
    assert relative_form_error(second.form, first.form) <= 2 * eps


def test_affine_symmetry_transfers_ellipsoid():
    rng = np.random.default_rng(4)
    E = Ellipsoid.from_axes([0.7, 1.3, 2.0], random_orthogonal(3, rng))
    K = ellipsoid_body(Ellipsoid(np.array([0.5, -1.0, 0.2]), E.form))
    A = mvee(boundary_sample(K, 1000)).ellipsoid.form
    for v in rng.standard_normal((5, 3)):
        R = reflection_in_direction(E, ProjLine.from_vector(v)).linear
        assert np.linalg.norm(R.T @ A @ R - A) <= 1e-3 * np.linalg.norm(A)


@pytest.mark.slow
def test_affine_symmetry_transfers_superellipsoid():
    Q = random_orthogonal(3, np.random.default_rng(0))
    K = superellipsoid_body([1.0, 1.5, 2.0], 2.5, None, Q)
    A = mvee(boundary_sample(K, 10_000)).ellipsoid.form
    for s in ([-1, 1, 1], [1, -1, 1], [1, 1, -1]):
        R = Q @ np.diag(s) @ Q.T
        assert np.linalg.norm(R.T @ A @ R - A) <= 1e-3 * np.linalg.norm(A)


def test_degenerate_inputs():
    with pytest.raises(DegeneratePointSet):
        mvee(np.array([[0, 0], [1, 1], [2, 2], [3, 3]], dtype=float))
    with pytest.raises(DegeneratePointSet):
        mvee(np.array([[0, 0], [1, 0]], dtype=float))
