"""Reflection algebra of a centered ellipsoid {x : x^T A x <= 1}.

Every line through the origin is the direction of exactly one reflection of
the ellipsoid. Its mirror has normal ``A d``; the reflection is orthogonal
exactly when ``d`` is an eigenvector of ``A`` (a binormal). For the remaining
(diagonal) lines the reflection restricts to an orthogonal reflection on a
unique hyperplane through ``d``, its ground hyperplane.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousGrouping, BinormalDirection, ContractViolation, SpecError
from .linalg import (
    as_symmetric,
    canonical_sign,
    line_distance,
    project_off,
    subspace_projector,
    sym_eigen,
    unit,
)

BINORMAL_TOL = 1e-9
GROUPING_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ProjLine:
    """Line through the origin, stored as a sign-canonical unit vector."""

    dir: np.ndarray

    @classmethod
    def from_vector(cls, v):
        return cls(canonical_sign(unit(v)))

    @property
    def n(self):
        return self.dir.size

    def distance(self, other):
        return line_distance(self.dir, other.dir)

    def tolist(self):
        return self.dir.tolist()


@dataclass(frozen=True, eq=False)
class ProjHyperplane:
    """Hyperplane through the origin, stored by its sign-canonical unit normal."""

    normal: np.ndarray

    @classmethod
    def from_normal(cls, v):
        return cls(canonical_sign(unit(v)))

    @property
    def n(self):
        return self.normal.size

    def distance(self, other):
        return line_distance(self.normal, other.normal)

    def contains(self, v, tol=1e-12):
        return abs(float(np.asarray(v) @ self.normal)) <= tol * max(1.0, np.linalg.norm(v))

    def tolist(self):
        return self.normal.tolist()


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    center: np.ndarray
    form: np.ndarray

    def __post_init__(self):
        form = as_symmetric(self.form)
        center = np.asarray(self.center, dtype=float).reshape(-1)
        if center.size != form.shape[0]:
            raise ContractViolation("center and form dimensions differ")
        try:
            np.linalg.cholesky(form)
        except np.linalg.LinAlgError:
            raise ContractViolation("form matrix is not positive definite") from None
        form.setflags(write=False)
        center.setflags(write=False)
        object.__setattr__(self, "form", form)
        object.__setattr__(self, "center", center)

    @classmethod
    def centered(cls, form):
        form = np.asarray(form, dtype=float)
        return cls(np.zeros(form.shape[0]), form)

    @classmethod
    def diagonal(cls, entries, center=None):
        entries = np.asarray(entries, dtype=float)
        c = np.zeros(entries.size) if center is None else center
        return cls(c, np.diag(entries))

    @classmethod
    def from_axes(cls, semi_axes, rotation=None, center=None):
        """Ellipsoid with the given semi-axis lengths along the columns of ``rotation``."""
        a = np.asarray(semi_axes, dtype=float)
        if np.any(a <= 0):
            raise SpecError("semi-axes must be positive")
        R = np.eye(a.size) if rotation is None else np.asarray(rotation, dtype=float)
        if R.shape != (a.size, a.size):
            raise SpecError("rotation shape does not match semi_axes")
        if np.max(np.abs(R.T @ R - np.eye(a.size))) > 1e-10:
            raise SpecError("rotation is not orthogonal within 1e-10")
        form = (R / a**2) @ R.T
        form = (form + form.T) / 2
        c = np.zeros(a.size) if center is None else center
        return cls(c, form)

    @classmethod
    def from_dict(cls, spec):
        try:
            if "form" in spec:
                form = np.asarray(spec["form"], dtype=float)
                n = spec.get("n", form.shape[0])
                center = spec.get("center", [0.0] * n)
                if form.shape != (n, n) or len(center) != n:
                    raise SpecError("dimension mismatch in ellipsoid spec")
                return cls(np.asarray(center, dtype=float), form)
            if "semi_axes" in spec:
                a = spec["semi_axes"]
                n = spec.get("n", len(a))
                center = spec.get("center", [0.0] * n)
                if len(a) != n or len(center) != n:
                    raise SpecError("dimension mismatch in ellipsoid spec")
                return cls.from_axes(a, spec.get("rotation"), np.asarray(center, dtype=float))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"malformed ellipsoid spec: {exc}") from exc
        raise SpecError("ellipsoid spec needs 'form' or 'semi_axes'")

    def to_dict(self):
        return {"n": self.n, "center": self.center.tolist(), "form": self.form.tolist()}

    @property
    def n(self):
        return self.form.shape[0]

    def is_centered(self):
        return not np.any(self.center)

    def contains(self, points):
        y = np.atleast_2d(points) - self.center
        return np.einsum("ij,jk,ik->i", y, self.form, y) <= 1.0


@dataclass(frozen=True, eq=False)
class Reflection:
    """Affine reflection ``x -> center + linear @ (x - center)``."""

    linear: np.ndarray
    direction: ProjLine
    mirror: ProjHyperplane
    center: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def apply(self, points):
        c = self.center if self.center.size else 0.0
        return (np.atleast_2d(points) - c) @ self.linear.T + c

    @property
    def is_orthogonal(self):
        return self.direction.distance(ProjLine(self.mirror.normal)) <= BINORMAL_TOL


@dataclass(frozen=True, eq=False)
class EigenGroup:
    eigenvalue: float
    binormal_length: float
    basis: np.ndarray

    @property
    def dim(self):
        return self.basis.shape[1]

    def projector(self):
        return subspace_projector(self.basis)


@dataclass(frozen=True, eq=False)
class SpectrumPartition:
    """Eigenspaces of the form, grouped by binormal length (longest first)."""

    groups: tuple
    grouping_tol: float

    @property
    def k(self):
        return len(self.groups)

    @property
    def lengths(self):
        return [g.binormal_length for g in self.groups]

    @property
    def dims(self):
        return [g.dim for g in self.groups]

    def to_dict(self):
        return {
            "k": self.k,
            "lambdas": self.lengths,
            "eigenvalues": [g.eigenvalue for g in self.groups],
            "dims": self.dims,
            "bases": [g.basis.T.tolist() for g in self.groups],
            "grouping_tol": self.grouping_tol,
        }


def _require_centered(E):
    if not E.is_centered():
        raise ContractViolation("operation needs an ellipsoid centered at the origin")


def _check_dim(E, v):
    if v.size != E.n:
        raise ContractViolation(f"vector of dimension {v.size} for ellipsoid in R^{E.n}")


def mirror(E, l):
    """Hyperplane through the midpoints of all chords of ``E`` parallel to ``l``."""
    _require_centered(E)
    _check_dim(E, l.dir)
    return ProjHyperplane.from_normal(E.form @ l.dir)


def chord_length(E, l):
    _require_centered(E)
    _check_dim(E, l.dir)
    return 2.0 / np.sqrt(l.dir @ E.form @ l.dir)


def binormal_angle(E, l):
    """Angle between ``l`` and ``A l``; zero exactly on the axes of ``E``."""
    a = E.form @ l.dir
    return float(np.arctan2(np.linalg.norm(project_off(a, l.dir)), a @ l.dir))


def is_binormal(E, l, tol=BINORMAL_TOL):
    _require_centered(E)
    _check_dim(E, l.dir)
    return binormal_angle(E, l) <= tol


def reflection_in_direction(E, l):
    """The unique reflection of ``E`` whose direction is ``l``."""
    _require_centered(E)
    _check_dim(E, l.dir)
    d = l.dir
    a = E.form @ d
    R = np.eye(E.n) - 2.0 * np.outer(d, a) / (a @ d)
    return Reflection(R, l, ProjHyperplane.from_normal(a), np.zeros(E.n))


def polar_value(E, l1, l2):
    return float(l2.dir @ E.form @ l1.dir)


def polar_pair_check(E, l1, l2, tol=1e-10):
    """Whether ``l2`` lies in the mirror of ``l1`` (equivalently, ``l1`` in that of ``l2``)."""
    _require_centered(E)
    return abs(polar_value(E, l1, l2)) <= tol * np.linalg.norm(E.form)


def ground(E, l, tol=BINORMAL_TOL):
    """Ground hyperplane ``(M(l) ∩ l^⊥) ⊕ l`` of the reflection with direction ``l``."""
    _require_centered(E)
    _check_dim(E, l.dir)
    if is_binormal(E, l, tol):
        raise BinormalDirection(
            "line is an axis of the ellipsoid: every hyperplane through it is a ground hyperplane"
        )
    return ProjHyperplane.from_normal(project_off(E.form @ l.dir, l.dir))


def spectrum_partition(E, grouping_tol=GROUPING_TOL):
    """Group the eigenvalues of the form by relative gap ``<= grouping_tol``."""
    dec = sym_eigen(E.form)
    values, vectors = dec.values, dec.vectors
    if values[0] <= 0:
        raise ContractViolation("form matrix is not positive definite")
    runs = [[0]]
    for i in range(1, values.size):
        gap = values[i] - values[i - 1]
        if gap <= grouping_tol * max(abs(values[i]), abs(values[i - 1])):
            runs[-1].append(i)
        else:
            runs.append([i])
    groups = []
    for run in runs:
        lo, hi = values[run[0]], values[run[-1]]
        if hi - lo > grouping_tol * hi:
            raise AmbiguousGrouping(
                f"eigenvalues {lo!r}..{hi!r} chain together but span more than the grouping tolerance"
            )
        alpha = float(np.mean(values[run]))
        groups.append(EigenGroup(alpha, 2.0 / np.sqrt(alpha), vectors[:, run]))
    # Ascending eigenvalues give descending binormal lengths.
    return SpectrumPartition(tuple(groups), grouping_tol)
