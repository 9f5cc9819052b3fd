"""Convex bodies given by membership oracles, and the built-in families.

``contains`` is vectorized: it maps an ``(m, n)`` array of points to an
``(m,)`` boolean array. ``bounding_radius`` is the radius of a ball around
``interior_point`` that contains the body.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ContractViolation, SpecError
from .linalg import unit
from .quadric import Ellipsoid


@dataclass(frozen=True, eq=False)
class BodyOracle:
    n: int
    contains: Callable
    interior_point: np.ndarray
    bounding_radius: float
    label: str = "body"
    spec: dict = field(default=None, repr=False)

    def __post_init__(self):
        p = np.asarray(self.interior_point, dtype=float)
        object.__setattr__(self, "interior_point", p)
        if p.size != self.n:
            raise ContractViolation("interior point has the wrong dimension")
        if not self.bounding_radius > 0:
            raise ContractViolation("bounding radius must be positive")
        if not bool(self.contains(p[None, :])[0]):
            raise ContractViolation(f"{self.label}: interior point is not contained")

    def __call__(self, points):
        return np.asarray(self.contains(np.atleast_2d(points)), dtype=bool)


def _frame(n, center, rotation):
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    R = np.eye(n) if rotation is None else np.asarray(rotation, dtype=float)
    if c.size != n or R.shape != (n, n):
        raise SpecError("center/rotation dimension mismatch")
    if np.max(np.abs(R.T @ R - np.eye(n))) > 1e-10:
        raise SpecError("rotation is not orthogonal within 1e-10")
    return c, R


def ellipsoid_body(E, label="ellipsoid"):
    c, A = E.center, E.form
    radius = 1.0 / np.sqrt(np.linalg.eigvalsh(A)[0])

    def contains(x):
        y = x - c
        return np.einsum("ij,jk,ik->i", y, A, y) <= 1.0

    return BodyOracle(E.n, contains, c, radius, label, {"kind": "ellipsoid", **E.to_dict()})


def superellipsoid_body(semi_axes, p, center=None, rotation=None, label="superellipsoid"):
    """``sum |y_i / a_i|^p <= 1`` in the frame ``y = R^T (x - center)``, ``p >= 1``."""
    a = np.asarray(semi_axes, dtype=float)
    if np.any(a <= 0) or p < 1:
        raise SpecError("superellipsoid needs positive semi-axes and exponent p >= 1")
    c, R = _frame(a.size, center, rotation)

    def contains(x):
        y = (x - c) @ R
        return np.sum(np.abs(y / a) ** p, axis=1) <= 1.0

    spec = {"kind": "superellipsoid", "semi_axes": a.tolist(), "p": p, "center": c.tolist(), "rotation": R.tolist()}
    return BodyOracle(a.size, contains, c, float(np.linalg.norm(a)), label, spec)


def box_body(half_extents, center=None, rotation=None, label="box"):
    h = np.asarray(half_extents, dtype=float)
    if np.any(h <= 0):
        raise SpecError("box needs positive half extents")
    c, R = _frame(h.size, center, rotation)

    def contains(x):
        y = (x - c) @ R
        return np.all(np.abs(y) <= h, axis=1)

    spec = {"kind": "box", "half_extents": h.tolist(), "center": c.tolist(), "rotation": R.tolist()}
    return BodyOracle(h.size, contains, c, float(np.linalg.norm(h)), label, spec)


def validate_profile(profile):
    """Check a revolution profile: heights increasing, radii >= 0, concave."""
    prof = np.asarray(profile, dtype=float)
    if prof.ndim != 2 or prof.shape[1] != 2 or prof.shape[0] < 2:
        raise SpecError("profile must be a list of at least two (z, radius) pairs")
    z, r = prof[:, 0], prof[:, 1]
    if np.any(np.diff(z) <= 0):
        raise SpecError("profile heights must be strictly increasing")
    if np.any(r < 0) or not np.any(r > 0):
        raise SpecError("profile radii must be non-negative and not all zero")
    slopes = np.diff(r) / np.diff(z)
    if np.any(np.diff(slopes) > 1e-12 * max(1.0, np.max(np.abs(slopes)))):
        raise SpecError("profile is not concave, so the body would not be convex")
    return z, r


def revolution_body(profile, axis=(0.0, 0.0, 1.0), center=None, label="revolution"):
    """Body of revolution in R^3 around the line ``center + t * axis``.

    The radius at height ``z`` along the axis is the piecewise-linear
    interpolation of ``profile``; a concave profile gives a convex body.
    """
    z, r = validate_profile(profile)
    u = unit(axis)
    if u.size != 3:
        raise SpecError("revolution bodies live in R^3")
    c = np.zeros(3) if center is None else np.asarray(center, dtype=float)
    z_mid = z[int(np.argmax(r))]
    interior = c + z_mid * u
    radius = float(np.max(np.hypot(z - z_mid, r)))

    def contains(x):
        y = x - c
        h = y @ u
        rho = np.linalg.norm(y - np.outer(h, u), axis=1)
        inside = (h >= z[0]) & (h <= z[-1])
        return inside & (rho <= np.interp(h, z, r))

    spec = {"kind": "revolution", "profile": np.column_stack([z, r]).tolist(), "axis": u.tolist(), "center": c.tolist()}
    return BodyOracle(3, contains, interior, radius, label, spec)


def perturbed_body(E, bumps, strength, label="perturbed"):
    """Ellipsoid distorted by convex exponential bumps.

    The body is ``{x : q(y) + strength * sum_j phi(b_j . y) <= 1}`` with
    ``y = x - center``, ``q`` the ellipsoid's form and
    ``phi(t) = exp(t) - 1 - t``. Each term is convex and non-negative, so the
    body is convex and sits inside ``E``.
    """
    b = np.atleast_2d(np.asarray(bumps, dtype=float))
    if b.shape[1] != E.n or strength < 0:
        raise SpecError("bumps must be n-vectors and strength non-negative")
    c, A = E.center, E.form

    def contains(x):
        y = x - c
        t = y @ b.T
        f = np.einsum("ij,jk,ik->i", y, A, y) + strength * np.sum(np.expm1(t) - t, axis=1)
        return f <= 1.0

    radius = 1.0 / np.sqrt(np.linalg.eigvalsh(A)[0])
    spec = {"kind": "perturbed", **E.to_dict(), "bumps": b.tolist(), "strength": strength}
    return BodyOracle(E.n, contains, c, radius, label, spec)


def body_from_dict(spec):
    """Build a body from its JSON description (``kind`` selects the family)."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError("body spec must be an object with a 'kind'")
    kind = spec["kind"]
    label = spec.get("label", kind)
    try:
        if kind == "ellipsoid":
            return ellipsoid_body(Ellipsoid.from_dict(spec), label)
        if kind == "superellipsoid":
            return superellipsoid_body(spec["semi_axes"], float(spec["p"]), spec.get("center"), spec.get("rotation"), label)
        if kind == "box":
            return box_body(spec["half_extents"], spec.get("center"), spec.get("rotation"), label)
        if kind == "revolution":
            return revolution_body(spec["profile"], spec.get("axis", (0, 0, 1)), spec.get("center"), label)
        if kind == "perturbed":
            return perturbed_body(Ellipsoid.from_dict(spec), spec["bumps"], float(spec.get("strength", 0.3)), label)
    except KeyError as exc:
        raise SpecError(f"{kind} spec is missing {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"malformed {kind} spec: {exc}") from exc
    raise SpecError(f"unknown body kind {kind!r}")


def convexity_violations(K, pairs=1000, seed=0):
    """Count contained pairs whose midpoint is not contained.

    Pairs are drawn from the bounding ball and kept when both ends are inside.
    """
    rng = np.random.default_rng(seed)
    found, bad = 0, 0
    while found < pairs:
        g = rng.standard_normal((4 * pairs, K.n))
        g *= (rng.random(4 * pairs) ** (1.0 / K.n) / np.linalg.norm(g, axis=1))[:, None]
        pts = K.interior_point + K.bounding_radius * g
        inside = pts[K(pts)]
        m = len(inside) // 2
        if m == 0:
            continue
        a, b = inside[:m], inside[m : 2 * m]
        take = min(m, pairs - found)
        bad += int(np.sum(~K((a[:take] + b[:take]) / 2)))
        found += take
    return bad
