"""Reflections of convex bodies given by membership oracles.

A line ``l`` is the direction of a reflection of ``K`` exactly when the
midpoints of all chords of ``K`` parallel to ``l`` lie in a hyperplane, which
is then the mirror. The routines here sample parallel chords by bisection,
fit that hyperplane, and test the resulting affine reflection against the
boundary. All lengths in reports are in units of ``K.bounding_radius``.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from ._parallel import index_rng, pmap
from .errors import TooFewChords
from .linalg import canonical_sign, hyperplane_basis, line_angle, project_off, unit
from .mvee import mvee
from .quadric import ProjLine

THRESHOLD = 1e-3
BISECTION_TOL = 1e-9
GRID = 4
PROBES = 64
INVARIANCE_POINTS = 512
BALL_RADIUS = 0.1
BALL_PROBES = 50
CLUSTER_RADIUS = 0.05


@dataclass(frozen=True, eq=False)
class MirrorFit:
    direction: ProjLine
    normal: np.ndarray
    offset: float
    residual_rms: float
    chords_used: int

    @property
    def transversality(self):
        """|cos| of the angle between the direction and the mirror normal."""
        return abs(float(self.normal @ self.direction.dir))

    @property
    def orthogonality_angle(self):
        """Angle between the direction and the mirror normal (0 for orthogonal reflections)."""
        return line_angle(self.normal, self.direction.dir)

    def reflect(self, points):
        d = self.direction.dir
        s = (np.atleast_2d(points) @ self.normal - self.offset) / (self.normal @ d)
        return points - 2.0 * np.outer(s, d)

    def to_dict(self):
        return {
            "direction": self.direction.tolist(),
            "normal": self.normal.tolist(),
            "offset": self.offset,
            "residual_rms": self.residual_rms,
            "chords_used": self.chords_used,
        }


class ReflectionTest(NamedTuple):
    accepted: bool
    fit: MirrorFit
    invariance_error: float


@dataclass(eq=False)
class DirectionScanReport:
    """Sampled reflection directions of a body.

    ``thick_estimate`` approximates whether the accepted set has interior: it
    is the largest fraction of accepted probes in an angular ball of radius
    ``ball_radius`` around an accepted line. It is a sampled surrogate, not a
    topological certificate.
    """

    samples: int
    accepted: list
    threshold: float
    thick_estimate: float
    seed: int
    rows: list = field(default_factory=list, repr=False)
    ball_radius: float = BALL_RADIUS
    balls: list = field(default_factory=list)

    @property
    def accepted_fraction(self):
        return len(self.accepted) / self.samples

    @property
    def min_score(self):
        return min((r["score"] for r in self.rows), default=float("inf"))

    def to_dict(self):
        return {
            "samples": self.samples,
            "accepted": [
                {"line": l.tolist(), "residual_rms": res, "invariance_error": inv} for l, res, inv in self.accepted
            ],
            "threshold": self.threshold,
            "thick_estimate": self.thick_estimate,
            "thick_estimate_note": "sampled ball-fraction surrogate for thickness",
            "ball_radius": self.ball_radius,
            "balls": self.balls,
            "seed": self.seed,
            "min_score": self.min_score,
        }

    csv_header = ("index", "line", "residual_rms", "invariance_error", "accepted")

    def csv_rows(self):
        for r in self.rows:
            yield (r["index"], r["line"], r["residual_rms"], r["invariance_error"], int(r["accepted"]))


@dataclass(eq=False)
class OrthoScanReport:
    """Orthogonal reflections found by sampling and local refinement.

    ``nonfinite`` is raised when some accepted direction has another accepted
    direction at angular distance ``probe_radius`` from it, i.e. the set looks
    like a continuum rather than isolated points. ``circles`` records such
    pairs of directions.
    """

    lines: list
    scores: list
    nonfinite: bool
    circles: list
    samples: int
    threshold: float
    seed: int
    min_score: float
    candidates: int = 0

    def to_dict(self):
        return {
            "lines": [l.tolist() for l in self.lines],
            "scores": self.scores,
            "nonfinite": self.nonfinite,
            "circles": [[a.tolist(), b.tolist()] for a, b in self.circles],
            "samples": self.samples,
            "threshold": self.threshold,
            "seed": self.seed,
            "min_score": self.min_score,
            "candidates": self.candidates,
        }


def _ball_exit(K, origins, dirs):
    """Parameter where ``origin + t * dir`` leaves the (slightly inflated) bounding ball."""
    R = K.bounding_radius * (1.0 + 1e-6)
    w = origins - K.interior_point
    b = np.einsum("ij,ij->i", w, dirs)
    c = np.einsum("ij,ij->i", w, w) - R * R
    return -b + np.sqrt(np.maximum(b * b - c, 0.0))


def _bisect(K, origins, dirs, t_in, t_out, tol):
    """Boundary parameter between known-inside ``t_in`` and known-outside ``t_out``."""
    t_in, t_out = t_in.copy(), t_out.copy()
    span = np.max(np.abs(t_out - t_in)) if t_in.size else 0.0
    steps = int(np.ceil(np.log2(max(span, 1e-300) / (tol * K.bounding_radius)))) + 1
    for _ in range(max(steps, 1)):
        mid = 0.5 * (t_in + t_out)
        inside = K(origins + mid[:, None] * dirs)
        t_in = np.where(inside, mid, t_in)
        t_out = np.where(inside, t_out, mid)
    return 0.5 * (t_in + t_out)


def ray_exit(K, origins, dirs, tol=BISECTION_TOL):
    """Distance from each interior ``origin`` to the boundary along its unit ``dir``."""
    dirs = np.atleast_2d(dirs)
    origins = np.broadcast_to(origins, dirs.shape)
    return _bisect(K, origins, dirs, np.zeros(len(dirs)), _ball_exit(K, origins, dirs), tol)


def radial_function(K, dirs, origin=None, tol=BISECTION_TOL):
    """Distance from ``origin`` (an interior point) to the boundary along each unit direction."""
    o = K.interior_point if origin is None else np.asarray(origin, dtype=float)
    return ray_exit(K, o, dirs, tol)


@lru_cache(maxsize=64)
def boundary_sample(K, m=INVARIANCE_POINTS, seed=0):
    """``m`` boundary points by ray shooting from the interior point."""
    rng = np.random.default_rng([seed, 7919])
    dirs = rng.standard_normal((m, K.n))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    rho = radial_function(K, dirs)
    pts = K.interior_point + rho[:, None] * dirs
    pts.setflags(write=False)
    return pts


def boundary_distance(K, points, tol=BISECTION_TOL):
    """Signed radial distance from ``points`` to the boundary (positive outside)."""
    v = np.atleast_2d(points) - K.interior_point
    r = np.linalg.norm(v, axis=1)
    u = v / np.where(r > 0, r, 1.0)[:, None]
    u[r == 0] = np.eye(K.n)[0]
    return r - radial_function(K, u, tol=tol)


def chords(K, bases, d, tol=BISECTION_TOL, probes=PROBES):
    """Chords of ``K`` along lines ``base + t d``.

    ``d`` is one unit vector or one per base. Returns ``(lo, hi, ok)``:
    endpoint arrays and a mask of lines that met the body (some inside probe
    among ``probes`` evenly spaced ones).
    """
    bases = np.atleast_2d(np.asarray(bases, dtype=float))
    m = len(bases)
    d = np.broadcast_to(np.asarray(d, dtype=float), bases.shape)
    R = K.bounding_radius * (1.0 + 1e-6)
    w = bases - K.interior_point
    t0 = -np.einsum("ij,ij->i", w, d)
    dist2 = np.einsum("ij,ij->i", w, w) - t0 * t0
    ok = dist2 < R * R
    half = np.sqrt(np.maximum(R * R - dist2, 0.0))
    frac = (np.arange(probes) + 0.5) / probes * 2.0 - 1.0
    ts = t0[:, None] + half[:, None] * frac[None, :]
    pts = bases[:, None, :] + ts[..., None] * d[:, None, :]
    inside = K(pts.reshape(-1, K.n)).reshape(m, probes) & ok[:, None]
    ok = inside.any(axis=1)
    lo = np.full((m, K.n), np.nan)
    hi = np.full((m, K.n), np.nan)
    if not ok.any():
        return lo, hi, ok
    idx = np.flatnonzero(ok)
    first = np.argmax(inside[idx], axis=1)
    t_in = ts[idx, first]
    dirs = d[idx]
    o = bases[idx]
    t_hi = _bisect(K, o, dirs, t_in, t0[idx] + half[idx], tol)
    t_lo = _bisect(K, o, dirs, t_in, t0[idx] - half[idx], tol)
    lo[idx] = o + t_lo[:, None] * dirs
    hi[idx] = o + t_hi[:, None] * dirs
    return lo, hi, ok


def chord(K, base, l, tol=BISECTION_TOL):
    """Endpoints of ``K ∩ (base + span l)``, or ``None`` if the line misses ``K``."""
    lo, hi, ok = chords(K, np.asarray(base, dtype=float)[None, :], l.dir, tol)
    return (lo[0], hi[0]) if ok[0] else None


def _lattice(K, d, grid):
    B = hyperplane_basis(d)
    ticks = np.linspace(-1.0, 1.0, 2 * grid + 1) * K.bounding_radius
    mesh = np.stack(np.meshgrid(*([ticks] * (K.n - 1)), indexing="ij"), -1).reshape(-1, K.n - 1)
    return K.interior_point + mesh @ B.T


def chord_midpoints(K, d, grid=GRID, tol=BISECTION_TOL):
    lo, hi, ok = chords(K, _lattice(K, d, grid), d, tol)
    length = np.linalg.norm(hi[ok] - lo[ok], axis=1)
    keep = length > 10 * tol * K.bounding_radius
    return 0.5 * (lo[ok] + hi[ok])[keep]


def fit_mirror(K, l, grid=GRID, tol=BISECTION_TOL):
    """Least-squares hyperplane through midpoints of chords parallel to ``l``.

    Chords run along a ``(2 grid + 1)^(n-1)`` lattice of lines spanning the
    bounding box transverse to ``l``; lines that miss the body are skipped.
    """
    mids = chord_midpoints(K, l.dir, grid, tol)
    if len(mids) < K.n + 1:
        raise TooFewChords(f"only {len(mids)} chords parallel to the line met the body")
    mean = mids.mean(axis=0)
    X = mids - mean
    normal = np.linalg.svd(X, full_matrices=True)[2][-1]
    normal = canonical_sign(normal)
    rms = float(np.sqrt(np.mean((X @ normal) ** 2))) / K.bounding_radius
    return MirrorFit(l, normal, float(normal @ mean), rms, len(mids))


def invariance_error(K, fit, points=None):
    """Largest radial distance from a reflected boundary point to the boundary."""
    if fit.transversality < 1e-6:
        return float("inf")
    pts = boundary_sample(K) if points is None else points
    return float(np.max(np.abs(boundary_distance(K, fit.reflect(pts))))) / K.bounding_radius


def has_reflection(K, l, threshold=THRESHOLD, grid=GRID, tol=BISECTION_TOL):
    """Fit the mirror for direction ``l`` and test the reflection it defines."""
    fit = fit_mirror(K, l, grid, tol)
    err = invariance_error(K, fit)
    return ReflectionTest(fit.residual_rms <= threshold and err <= threshold, fit, err)


def random_lines(n, count, rng):
    g = rng.standard_normal((count, n))
    return [ProjLine.from_vector(v) for v in g]


def ball_probes(center, radius, count, rng):
    """Lines uniformly distributed in the angular ball of ``radius`` around ``center``."""
    d = center.dir
    n = d.size
    out = []
    for _ in range(count):
        v = unit(project_off(rng.standard_normal(n), d))
        theta = radius * rng.random() ** (1.0 / (n - 1))
        out.append(ProjLine.from_vector(np.cos(theta) * d + np.sin(theta) * v))
    return out


def _scan_row(K, l, threshold, grid, tol, index):
    try:
        test = has_reflection(K, l, threshold, grid, tol)
        res, inv, ok = test.fit.residual_rms, test.invariance_error, test.accepted
    except TooFewChords:
        res, inv, ok = float("inf"), float("inf"), False
    return {"index": index, "line": l.dir.tolist(), "residual_rms": res, "invariance_error": inv,
            "score": max(res, inv), "accepted": ok, "_line": l}


def direction_scan(
    K,
    samples=2000,
    threshold=THRESHOLD,
    seed=0,
    threads=None,
    grid=GRID,
    tol=BISECTION_TOL,
    ball_radius=BALL_RADIUS,
    probes_per_ball=BALL_PROBES,
    max_balls=8,
):
    """Test uniformly sampled lines for being reflection directions of ``K``."""
    lines = [random_lines(K.n, 1, index_rng(seed, i))[0] for i in range(samples)]
    rows = pmap(lambda i: _scan_row(K, lines[i], threshold, grid, tol, i), range(samples), threads)
    accepted_rows = [r for r in rows if r["accepted"]]
    accepted = [(r["_line"], r["residual_rms"], r["invariance_error"]) for r in accepted_rows]
    thick, balls = 0.0, []
    for b, r in enumerate(sorted(accepted_rows, key=lambda r: (r["score"], r["index"]))[:max_balls]):
        probes = ball_probes(r["_line"], ball_radius, probes_per_ball, index_rng(seed, samples + b))
        hits = pmap(lambda p: _scan_row(K, p, threshold, grid, tol, -1)["accepted"], probes, threads)
        frac = sum(hits) / len(hits)
        balls.append({"center": r["line"], "fraction": frac})
        thick = max(thick, frac)
        if thick == 1.0:
            break
    for r in rows:
        r.pop("_line")
    return DirectionScanReport(samples, accepted, threshold, thick, seed, rows, ball_radius, balls)


class _OrthoScore:
    """Invariance error of the orthogonal reflection with direction ``d``.

    The mirror offset comes from the mean of parallel chord midpoints.
    """

    def __init__(self, K, grid=GRID, tol=BISECTION_TOL):
        self.K, self.grid, self.tol = K, grid, tol
        self.points = boundary_sample(K)

    def errors(self, d):
        d = unit(d)
        mids = chord_midpoints(self.K, d, self.grid, self.tol)
        if len(mids) == 0:
            return np.full(len(self.points), np.inf)
        c = float(np.mean(mids @ d))
        s = self.points @ d - c
        reflected = self.points - 2.0 * np.outer(s, d)
        return np.abs(boundary_distance(self.K, reflected, self.tol)) / self.K.bounding_radius

    def rms(self, d):
        e = self.errors(d)
        return float(np.sqrt(np.mean(e * e)))

    def max(self, d):
        return float(np.max(self.errors(d)))


def _refine_direction(score, d0, step=0.05):
    B = hyperplane_basis(d0)

    def f(z):
        return score.rms(d0 + B @ z)

    z0 = np.zeros(B.shape[1])
    simplex = np.vstack([z0] + [step * e for e in np.eye(B.shape[1])])
    res = minimize(f, z0, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": 1e-10, "fatol": 1e-14, "maxiter": 600})
    return ProjLine.from_vector(d0 + B @ res.x)


def _tangent_probe(score, d, radius, coarse=36):
    """Best orthogonal-reflection score over lines at angle ``radius`` from ``d``."""
    B = hyperplane_basis(d)
    n = d.size

    def line_at(t):
        t = np.asarray(t, dtype=float)
        v = unit(B @ t) if t.size == B.shape[1] else B[:, 0] * np.cos(t[0]) + B[:, 1] * np.sin(t[0])
        return np.cos(radius) * d + np.sin(radius) * v

    if n == 3:
        phis = np.linspace(0, np.pi, coarse, endpoint=False)
        vals = [score.rms(line_at([p])) for p in phis]
        i = int(np.argmin(vals))
        h = np.pi / coarse
        res = minimize_scalar(lambda p: score.rms(line_at([p])), bounds=(phis[i] - h, phis[i] + h),
                              method="bounded", options={"xatol": 1e-10})
        best = line_at([res.x])
    else:
        rng = np.random.default_rng(n)
        starts = [unit(rng.standard_normal(B.shape[1])) for _ in range(4 * coarse)]
        vals = [score.rms(line_at(t)) for t in starts]
        t0 = starts[int(np.argmin(vals))]
        res = minimize(lambda t: score.rms(line_at(t)), t0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 800})
        best = line_at(res.x)
    return ProjLine.from_vector(best), score.max(best)


def orthogonal_reflection_scan(
    K,
    samples=200,
    threshold=THRESHOLD,
    seed=0,
    threads=None,
    angle_threshold=None,
    cluster_radius=CLUSTER_RADIUS,
    max_seeds=12,
    probe_radius=2 * BALL_RADIUS,
):
    """Directions of orthogonal reflections of ``K``.

    Sampled lines are scored by the invariance error of the orthogonal
    reflection they define; sampled local minima seed a Nelder-Mead refinement
    and refined directions that pass ``has_reflection`` with an orthogonal
    fitted mirror are kept, merging those within ``cluster_radius``.
    """
    angle_threshold = threshold if angle_threshold is None else angle_threshold
    score = _OrthoScore(K)
    lines = [random_lines(K.n, 1, index_rng(seed, i))[0] for i in range(samples)]
    scores = pmap(lambda l: score.rms(l.dir), lines, threads)
    order = np.argsort(scores, kind="stable")
    D = np.array([l.dir for l in lines])
    cos = np.abs(D @ D.T)
    spacing = (2 * np.pi / samples) ** (1.0 / (K.n - 1))
    neighbourhood = np.cos(min(0.6, 2.0 * spacing))
    seeds = []
    for rank, i in enumerate(order):
        if not np.any(cos[i, order[:rank]] >= neighbourhood):
            seeds.append(lines[i])
        if len(seeds) >= max_seeds:
            break
    refined = pmap(lambda l: _refine_direction(score, l.dir), seeds, threads)
    found, found_scores = [], []
    for d in refined:
        err = score.max(d.dir)
        if err > threshold:
            continue
        if any(d.distance(f) < np.sin(cluster_radius) for f in found):
            continue
        test = has_reflection(K, d, threshold)
        if not test.accepted or test.fit.orthogonality_angle > angle_threshold:
            continue
        found.append(d)
        found_scores.append(err)
    circles = []
    for d in found:
        probe, err = _tangent_probe(score, d.dir, probe_radius)
        if err <= threshold:
            circles.append((d, probe))
    min_score = float(min(scores)) if scores else float("inf")
    return OrthoScanReport(found, found_scores, bool(circles), circles, samples, threshold, seed, min_score,
                           len(seeds))


@dataclass
class ClassifyConfig:
    threshold: float = THRESHOLD
    direction_samples: int = 100
    ortho_samples: int = 200
    thick_min: float = 0.9
    probes_per_ball: int = BALL_PROBES
    max_balls: int = 3
    mvee_eps: float = 1e-6
    boundary_points: int = 0
    surface_tol: float = THRESHOLD
    disk_tol: float = THRESHOLD
    disk_rays: int = 64
    disk_heights: int = 9
    seed: int = 0
    threads: int = None


@dataclass(eq=False)
class Classification:
    """Verdict with the evidence behind it.

    ``margin`` is the decisive ratio for the verdict: how far (as a factor of
    the relevant tolerance) the deciding statistics sit on the right side of
    their thresholds.
    """

    verdict: str
    margin: float
    evidence: dict

    def to_dict(self):
        return {"verdict": self.verdict, "margin": self.margin, "evidence": self.evidence}


def surface_deviation(fitted, points):
    """Largest ``|sqrt(q(p)) - 1|`` over ``points`` for the fitted ellipsoid's gauge ``q``."""
    E = fitted.ellipsoid if hasattr(fitted, "ellipsoid") else fitted
    y = np.atleast_2d(points) - E.center
    return float(np.max(np.abs(np.sqrt(np.einsum("ij,jk,ik->i", y, E.form, y)) - 1.0)))


def _axis_point(K, d1, d2, grid=GRID):
    """Point on both orthogonal mirrors of ``d1`` and ``d2`` nearest the interior point."""
    D = np.array([d1, d2])
    c = np.array([np.mean(chord_midpoints(K, d, grid) @ d) for d in D])
    x0 = K.interior_point
    return x0 + np.linalg.lstsq(D, c - D @ x0, rcond=None)[0]


def disk_deviation(K, d1, d2, rays=64, heights=9, seed=0):
    """Test the 2-planes spanned by ``d1``, ``d2`` for disks centred on the common axis.

    The axis is the flat through the intersection of the two orthogonal
    mirrors, orthogonal to ``span(d1, d2)``. Returns the largest spread of the
    radial function (from the axis point) over sampled planes, in units of the
    bounding radius, and the number of planes tested.
    """
    e1 = unit(d1)
    e2 = unit(project_off(d2, e1))
    x0 = _axis_point(K, e1, e2)
    W = np.linalg.svd(np.array([e1, e2]))[2][2:].T
    rng = np.random.default_rng([seed, 31])
    theta = np.linspace(0, 2 * np.pi, rays, endpoint=False)
    ring = np.outer(np.cos(theta), e1) + np.outer(np.sin(theta), e2)
    worst, planes = 0.0, 0
    R = K.bounding_radius
    if W.shape[1] == 1:
        offsets = np.linspace(-R, R, 4 * heights + 1)[:, None]
    else:
        offsets = rng.uniform(-R, R, (4 * heights, W.shape[1]))
    for off in offsets:
        y = x0 + W @ off
        if not K(y)[0]:
            continue
        rho = radial_function(K, ring, origin=y)
        if np.min(rho) < 1e-3 * R:
            continue
        worst = max(worst, float(np.max(rho) - np.min(rho)) / R)
        planes += 1
        if planes >= heights:
            break
    return worst, planes


def classify_body(K, config=None):
    """Classify ``K`` as ``"ellipsoid"``, ``"rotational"`` or ``"other"``.

    Ellipsoid: sampled reflection directions look thick and the boundary lies
    on its minimal enclosing ellipsoid. Rotational: a continuum of orthogonal
    reflection directions yields an axis whose orthogonal 2-plane sections are
    disks centred on it.
    """
    cfg = config or ClassifyConfig()
    thr = cfg.threshold
    evidence = {}
    ds = direction_scan(K, cfg.direction_samples, thr, cfg.seed, cfg.threads,
                        probes_per_ball=cfg.probes_per_ball, max_balls=cfg.max_balls)
    evidence["direction_scan"] = ds.to_dict()
    cloud = boundary_sample(K, cfg.boundary_points or 1000 * K.n, cfg.seed)
    fitted = mvee(cloud, cfg.mvee_eps)
    dev = surface_deviation(fitted, cloud)
    evidence["mvee"] = fitted.to_dict()
    evidence["surface_deviation"] = dev
    ellipsoid_margin = cfg.surface_tol / max(dev, 1e-300)
    non_ellipsoid_margin = dev / cfg.surface_tol
    if ds.thick_estimate >= cfg.thick_min and dev <= cfg.surface_tol:
        worst = max((max(res, inv) for _, res, inv in ds.accepted), default=0.0)
        margin = min(ellipsoid_margin, thr / max(worst, 1e-300))
        return Classification("ellipsoid", margin, evidence)

    ortho = orthogonal_reflection_scan(K, cfg.ortho_samples, thr, cfg.seed, cfg.threads)
    evidence["ortho_scan"] = ortho.to_dict()
    disks = []
    for d, probe in ortho.circles:
        spread, planes = disk_deviation(K, d.dir, probe.dir, cfg.disk_rays, cfg.disk_heights, cfg.seed)
        disks.append({"directions": [d.tolist(), probe.tolist()], "deviation": spread, "planes": planes})
        if planes and spread <= cfg.disk_tol:
            evidence["disk_tests"] = disks
            margin = min(cfg.disk_tol / max(spread, 1e-300), non_ellipsoid_margin)
            return Classification("rotational", margin, evidence)
    evidence["disk_tests"] = disks
    margin = min(ds.min_score / thr, ortho.min_score / thr, non_ellipsoid_margin)
    return Classification("other", margin, evidence)
