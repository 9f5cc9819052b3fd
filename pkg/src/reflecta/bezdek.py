"""Bezdek and strong-Bezdek planes of 3-dimensional convex bodies.

A plane is Bezdek when its section admits an orthogonal reflection (a mirror
line), and strong-Bezdek when one of those reflections is the restriction of
a reflection of the whole body, i.e. the plane is a ground plane of a
reflection of ``K``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from ._parallel import index_rng, pmap
from .body import (
    BISECTION_TOL,
    GRID,
    THRESHOLD,
    TooFewChords,
    has_reflection,
    radial_function,
    ray_exit,
)
from .errors import ContractViolation
from .linalg import hyperplane_basis, line_angle, unit
from .quadric import ProjLine

GRID_ANGLES = 360
REFINE_XTOL = 1e-8
CIRCLE_FRACTION = 0.9
PREFILTER = 20.0
MAX_REFINE = 6
CIRCLE_CANDIDATES = 12


@dataclass(frozen=True)
class Thresholds:
    symmetry: float = THRESHOLD
    reflection: float = THRESHOLD
    angle: float = THRESHOLD


@dataclass(eq=False)
class PlanarSection:
    """Boundary samples of ``K ∩ {x : normal . x = offset}``.

    ``boundary`` holds intrinsic 2D coordinates ``y`` with
    ``x = origin + basis @ y``; the points come from rays shot out of
    ``origin`` at evenly spaced angles, so they are in angular order.
    """

    body: object
    normal: np.ndarray
    offset: float
    basis: np.ndarray
    origin: np.ndarray
    boundary: np.ndarray
    centroid: np.ndarray

    def to_3d(self, y):
        return self.origin + np.atleast_2d(y) @ self.basis.T

    @property
    def scale(self):
        return float(np.max(np.linalg.norm(self.boundary, axis=1)))


@dataclass(eq=False)
class SymmetryAxes:
    """Mirror lines of a planar section.

    Each entry of ``axes`` is ``(line, residual, offset)``: ``line`` is the
    mirror line's 2D direction, ``offset`` its signed distance from the
    section origin along the in-plane normal. ``circular`` flags sections
    for which nearly every direction is a mirror line.
    """

    axes: list
    circular: bool
    grid_residuals: np.ndarray = field(repr=False, default=None)

    def __len__(self):
        return len(self.axes)


@dataclass(eq=False)
class BezdekReport:
    normal: np.ndarray
    offset: float
    section_axes: list
    bezdek: bool
    strong_bezdek: bool
    witness: tuple = None
    empty: bool = False
    circular: bool = False

    def to_dict(self):
        w = None
        if self.witness is not None:
            line, fit = self.witness
            w = {"direction": line.tolist(), "mirror": fit.to_dict()}
        return {
            "plane": {"normal": self.normal.tolist(), "offset": self.offset},
            "section_axes": [
                {"direction": l.tolist(), "residual": r, "offset": c} for l, r, c in self.section_axes
            ],
            "bezdek": self.bezdek,
            "strong_bezdek": self.strong_bezdek,
            "witness": w,
            "empty": self.empty,
            "circular": self.circular,
        }


@dataclass(eq=False)
class BezdekScanReport:
    samples: int
    fraction_bezdek: float
    fraction_strong: float
    threshold: float
    seed: int
    rows: list = field(default_factory=list, repr=False)
    nonempty: int = 0
    include_empty: bool = False

    def to_dict(self):
        return {
            "samples": self.samples,
            "nonempty": self.nonempty,
            "fraction_bezdek": self.fraction_bezdek,
            "fraction_strong": self.fraction_strong,
            "threshold": self.threshold,
            "seed": self.seed,
            "include_empty": self.include_empty,
            "rows": self.rows,
        }

    csv_header = ("index", "normal", "offset", "empty", "bezdek", "strong_bezdek", "axes", "witness")

    def csv_rows(self):
        for r in self.rows:
            yield (r["index"], r["normal"], r["offset"], int(r["empty"]), int(r["bezdek"]),
                   int(r["strong_bezdek"]), r["axes"], r["witness"] or [])


def _require_3d(K):
    if K.n != 3:
        raise ContractViolation("Bezdek planes are implemented for bodies in R^3")


def section_boundary(K, normal, offset, m=64, tol=BISECTION_TOL):
    """Sample the boundary of a planar section by ray shooting, or ``None`` if empty."""
    _require_3d(K)
    nu = unit(normal)
    R = K.bounding_radius
    height = float(nu @ K.interior_point) - offset
    if abs(height) >= R:
        return None
    B = hyperplane_basis(nu)
    foot = K.interior_point - height * nu
    r = np.sqrt(R * R - height * height)
    ticks = np.linspace(-r, r, 33)
    grid = np.stack(np.meshgrid(ticks, ticks, indexing="ij"), -1).reshape(-1, 2)
    probes = foot + grid @ B.T
    inside = K(probes)
    if not inside.any():
        return None
    origin = probes[inside].mean(axis=0)
    theta = 2 * np.pi * np.arange(m) / m
    ring = np.column_stack([np.cos(theta), np.sin(theta)])
    for _ in range(2):
        rho = radial_function(K, ring @ B.T, origin=origin, tol=tol)
        if np.max(rho) < 1e-6 * R:
            return None
        pts = ring * rho[:, None]
        c = _polygon_centroid(pts)
        origin = origin + B @ c
    rho = radial_function(K, ring @ B.T, origin=origin, tol=tol)
    if np.max(rho) < 1e-6 * R:
        return None
    pts = ring * rho[:, None]
    return PlanarSection(K, nu, float(offset), B, origin, pts, _polygon_centroid(pts))


def _polygon_centroid(pts):
    x, y = pts[:, 0], pts[:, 1]
    xs, ys = np.roll(x, -1), np.roll(y, -1)
    cross = x * ys - xs * y
    area = cross.sum() / 2
    if abs(area) < 1e-300:
        return pts.mean(axis=0)
    return np.array([((x + xs) * cross).sum(), ((y + ys) * cross).sum()]) / (6 * area)


def _residuals(S, thetas, grid=GRID, tol=BISECTION_TOL):
    """RMS boundary disagreement of the reflection in the mirror line at each angle.

    For direction ``theta`` the mirror line has direction ``(cos, sin)``; its
    offset is the mean in-plane normal coordinate of midpoints of section
    chords along the normal.
    """
    K, B = S.body, S.basis
    R = K.bounding_radius
    thetas = np.atleast_1d(thetas)
    a = np.column_stack([np.cos(thetas), np.sin(thetas)])
    nrm = np.column_stack([-np.sin(thetas), np.cos(thetas)])
    # Chord bases on the candidate mirror direction, strictly inside the section.
    reach = radial_function(K, np.vstack([a, -a]) @ B.T, origin=S.origin, tol=tol).reshape(2, -1)
    frac = np.linspace(-0.9, 0.9, 2 * grid + 1)
    t = np.where(frac[None, :] >= 0, frac[None, :] * reach[0][:, None], frac[None, :] * reach[1][:, None])
    bases = S.to_3d((a[:, None, :] * t[..., None]).reshape(-1, 2))
    n3 = np.repeat(nrm, frac.size, axis=0) @ B.T
    up = ray_exit(K, bases, n3, tol)
    down = ray_exit(K, bases, -n3, tol)
    c = (0.5 * (up - down)).reshape(len(thetas), -1).mean(axis=1)
    Y = S.boundary
    s = Y @ nrm.T - c[None, :]
    refl = Y[:, None, :] - 2.0 * s[..., None] * nrm[None, :, :]
    refl = refl.transpose(1, 0, 2).reshape(-1, 2)
    r = np.linalg.norm(refl, axis=1)
    u = refl / np.where(r > 0, r, 1.0)[:, None]
    rho = radial_function(K, u @ B.T, origin=S.origin, tol=tol)
    err = ((r - rho) / R).reshape(len(thetas), -1)
    res = np.sqrt(np.mean(err * err, axis=1))
    return res, c


def section_symmetry_axes(S, threshold=THRESHOLD, angles=GRID_ANGLES):
    """Mirror lines of the section ``S`` with residual at most ``threshold``.

    Residuals on a grid of ``angles`` directions in [0, pi) are refined at
    their local minima by bounded Brent search to ``1e-8`` rad.
    """
    thetas = np.pi * np.arange(angles) / angles
    res, offs = _residuals(S, thetas)
    good = res <= threshold
    if good.mean() >= CIRCLE_FRACTION:
        axes = [(ProjLine.from_vector([np.cos(t), np.sin(t)]), float(r), float(c))
                for t, r, c in zip(thetas[good], res[good], offs[good])]
        return SymmetryAxes(axes, True, res)
    h = np.pi / angles
    minima = [i for i in range(angles)
              if res[i] <= res[i - 1] and res[i] <= res[(i + 1) % angles] and res[i] <= PREFILTER * threshold]
    minima = sorted(minima, key=lambda i: res[i])[:MAX_REFINE]
    axes = []
    for i in minima:
        opt = minimize_scalar(lambda t: _residuals(S, t)[0][0], bounds=(thetas[i] - h, thetas[i] + h),
                              method="bounded", options={"xatol": REFINE_XTOL})
        t = float(opt.x)
        rr, cc = _residuals(S, t)
        if rr[0] <= threshold:
            line = ProjLine.from_vector([np.cos(t), np.sin(t)])
            if not any(line.distance(l) < 1e-6 for l, _, _ in axes):
                axes.append((line, float(rr[0]), float(cc[0])))
    axes.sort(key=lambda a: a[1])
    return SymmetryAxes(axes, False, res)


def _witness(S, axis, thresholds):
    """Test whether the section reflection in ``axis`` extends to a reflection of ``K``."""
    line, _, c = axis
    K, B = S.body, S.basis
    a2 = line.dir
    n2 = np.array([-a2[1], a2[0]])
    direction = ProjLine.from_vector(B @ n2)
    try:
        test = has_reflection(K, direction, thresholds.reflection)
    except TooFewChords:
        return None
    if not test.accepted:
        return None
    fit = test.fit
    trace = np.cross(fit.normal, S.normal)
    if np.linalg.norm(trace) < 1e-12:
        return None
    if line_angle(trace, B @ a2) > thresholds.angle:
        return None
    point = S.to_3d(c * n2)[0]
    if abs(fit.normal @ point - fit.offset) / K.bounding_radius > thresholds.reflection:
        return None
    return direction, fit


def classify_plane(K, normal, offset, thresholds=None, m=64):
    """Bezdek / strong-Bezdek verdict for the plane ``normal . x = offset``."""
    _require_3d(K)
    th = thresholds or Thresholds()
    nu = unit(normal)
    S = section_boundary(K, nu, offset, m)
    if S is None:
        return BezdekReport(nu, float(offset), [], True, False, None, empty=True)
    sym = section_symmetry_axes(S, th.symmetry)
    candidates = sym.axes
    if sym.circular:
        step = max(1, len(candidates) // CIRCLE_CANDIDATES)
        candidates = candidates[::step]
    witness = None
    for axis in candidates:
        witness = _witness(S, axis, th)
        if witness is not None:
            break
    return BezdekReport(nu, float(offset), sym.axes, len(sym.axes) > 0, witness is not None, witness,
                        circular=sym.circular)


def _plane_row(K, th, seed, index):
    rng = index_rng(seed, index)
    nu = unit(rng.standard_normal(3))
    g = rng.standard_normal(3)
    p = K.interior_point + K.bounding_radius * rng.random() ** (1 / 3) * unit(g)
    offset = float(nu @ p)
    rep = classify_plane(K, nu, offset, th)
    return {
        "index": index,
        "normal": nu.tolist(),
        "offset": offset,
        "empty": rep.empty,
        "bezdek": rep.bezdek,
        "strong_bezdek": rep.strong_bezdek,
        "axes": len(rep.section_axes),
        "circular": rep.circular,
        "witness": rep.witness[0].tolist() if rep.witness else None,
    }


def bezdek_scan(K, samples=200, thresholds=None, seed=0, threads=None, include_empty=False):
    """Fractions of Bezdek and strong-Bezdek planes among random planes meeting ``K``.

    Plane normals are uniform on the sphere and each plane passes through a
    point uniform in the bounding ball. Empty and point sections count as
    Bezdek but are left out of the denominators unless ``include_empty``.
    """
    _require_3d(K)
    th = thresholds or Thresholds()
    rows = pmap(lambda i: _plane_row(K, th, seed, i), range(samples), threads)
    pool = rows if include_empty else [r for r in rows if not r["empty"]]
    total = max(len(pool), 1)
    fb = sum(r["bezdek"] for r in pool) / total
    fs = sum(r["strong_bezdek"] for r in pool) / total
    nonempty = sum(not r["empty"] for r in rows)
    return BezdekScanReport(samples, fb, fs, th.symmetry, seed, rows, nonempty, include_empty)
