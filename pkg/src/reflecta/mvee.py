"""Minimum-volume enclosing ellipsoid of a point cloud.

Khachiyan's barycentric coordinate ascent with Todd-Yildirim away steps on
the lifted points ``(p, 1)``. Any affine symmetry of a body is a symmetry of
its minimal enclosing ellipsoid, which is what the body tests lean on.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DegeneratePointSet
from .quadric import Ellipsoid

MAX_ITER = 200_000


@dataclass(frozen=True, eq=False)
class FittedEllipsoid:
    ellipsoid: Ellipsoid
    relative_volume_gap: float
    iterations: int

    def to_dict(self):
        return {
            "center": self.ellipsoid.center.tolist(),
            "form": self.ellipsoid.form.tolist(),
            "relative_volume_gap": self.relative_volume_gap,
            "iterations": self.iterations,
        }


def mvee(points, eps=1e-4, max_iter=MAX_ITER):
    """(1 + eps)-approximate minimal enclosing ellipsoid ``{x : (x-c)^T A (x-c) <= 1}``.

    Iterates until the largest lifted Mahalanobis distance is at most
    ``(1 + eps)(n + 1)`` and the smallest one on the support is at least
    ``(1 - eps)(n + 1)``; the result is then scaled to pass through the
    farthest point, so every input point is contained.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or len(P) < 1:
        raise ContractViolation("points must be an (m, n) array")
    m, n = P.shape
    if eps <= 0:
        raise ContractViolation("eps must be positive")
    if m < n + 1 or np.linalg.matrix_rank(P - P.mean(axis=0)) < n:
        raise DegeneratePointSet("points do not affinely span the space")
    Q = np.hstack([P, np.ones((m, 1))])
    d1 = n + 1
    u = np.full(m, 1.0 / m)
    it = 0
    for it in range(1, max_iter + 1):
        X = (Q.T * u) @ Q
        M = np.einsum("ij,ij->i", Q @ np.linalg.inv(X), Q)
        j = int(np.argmax(M))
        support = u > 0
        i = int(np.flatnonzero(support)[np.argmin(M[support])])
        up, down = M[j] / d1 - 1.0, 1.0 - M[i] / d1
        if up <= eps and down <= eps:
            break
        if up >= down:
            step = (M[j] - d1) / (d1 * (M[j] - 1.0))
            u *= 1.0 - step
            u[j] += step
        else:
            step = (d1 - M[i]) / (d1 * (M[i] - 1.0))
            step = min(step, u[i] / (1.0 - u[i]))
            u *= 1.0 + step
            u[i] -= step
            u[i] = max(u[i], 0.0)
    c = u @ P
    S = (P.T * u) @ P - np.outer(c, c)
    A = np.linalg.inv(S) / n
    A = (A + A.T) / 2
    Y = P - c
    A /= np.max(np.einsum("ij,jk,ik->i", Y, A, Y))
    achieved = max(np.max(M) / d1 - 1.0, 0.0)
    gap = (1.0 + achieved) ** (d1 / 2.0) - 1.0
    return FittedEllipsoid(Ellipsoid(c, A), float(gap), it)


def relative_form_error(A, B):
    return float(np.linalg.norm(np.asarray(A) - np.asarray(B)) / np.linalg.norm(np.asarray(B)))


def ellipsoid_boundary_points(E, m, rng):
    """``m`` points on the boundary of ``E`` (radial projections of Gaussian directions)."""
    g = rng.standard_normal((m, E.n))
    scale = np.sqrt(np.einsum("ij,jk,ik->i", g, E.form, g))
    return E.center + g / scale[:, None]
