"""Hyperplane sections of a centered ellipsoid and the ground map's fibers.

Over a generic hyperplane the fiber of the ground map is the set of axes of
the section that are not axes of the ellipsoid; it always has ``k - 1``
elements of distinct lengths. ``cover_scan`` samples that count and
``track_fiber`` follows the sheets along paths of hyperplanes.
"""

from dataclasses import dataclass, field

import numpy as np

from ._parallel import index_rng, pmap
from .errors import (
    ContractViolation,
    DegenerateSection,
    SheetCollision,
    SphericalEllipsoid,
    StepTooLarge,
)
from .linalg import hyperplane_basis, line_distance, project_off, sym_eigen, unit
from .quadric import (
    BINORMAL_TOL,
    GROUPING_TOL,
    ProjHyperplane,
    ProjLine,
    _require_centered,
    binormal_angle,
    chord_length,
    spectrum_partition,
)

SCAN_TOL = 1e-6
MARGIN_FACTOR = 10.0
AMBIGUITY_FACTOR = 2.0
MAX_HALVINGS = 8
STEP_BOUND = 0.05
CONTINUITY_THRESHOLD = 0.25


@dataclass(frozen=True, eq=False)
class SectionEllipsoid:
    carrier: ProjHyperplane
    basis: np.ndarray
    form: np.ndarray

    def embed(self, y):
        return self.basis @ np.asarray(y, dtype=float)


@dataclass(frozen=True, eq=False)
class SectionAxis:
    line: ProjLine
    length: float
    degenerate: bool = False


@dataclass(eq=False)
class FiberResult:
    hyperplane: ProjHyperplane
    lines: list
    generic: bool
    degenerate: bool = False

    def __len__(self):
        return len(self.lines)

    @property
    def size(self):
        return len(self.lines)

    def directions(self):
        return np.array([l.dir for l, _ in self.lines]).reshape(len(self.lines), -1)

    def to_dict(self):
        return {
            "hyperplane": self.hyperplane.tolist(),
            "lines": [{"dir": l.tolist(), "length": float(length)} for l, length in self.lines],
            "generic": self.generic,
            "degenerate": self.degenerate,
        }


@dataclass(eq=False)
class CoverScanReport:
    samples: int
    histogram: dict
    rejected_nongeneric: int
    k: int
    seed: int
    rows: list = field(default_factory=list, repr=False)

    @property
    def accepted(self):
        return self.samples - self.rejected_nongeneric

    def to_dict(self):
        return {
            "samples": self.samples,
            "histogram": {str(s): c for s, c in sorted(self.histogram.items())},
            "rejected_nongeneric": self.rejected_nongeneric,
            "k": self.k,
            "seed": self.seed,
        }

    csv_header = ("index", "normal", "accepted", "fiber_size", "min_margin")

    def csv_rows(self):
        for r in self.rows:
            yield (r["index"], r["normal"], int(r["accepted"]), r["fiber_size"], r["min_margin"])


@dataclass(eq=False)
class MonodromyResult:
    """Outcome of tracking the fiber along a path of hyperplanes.

    ``permutation[i]`` is the index, in the final fiber, reached by the sheet
    starting at index ``i``. For a closed path this is the monodromy.
    """

    loop: list
    permutation: tuple
    max_step_jump: float
    closed: bool = False
    halvings: int = 0

    def to_dict(self):
        return {
            "loop": [G.tolist() for G in self.loop],
            "permutation": list(self.permutation),
            "max_step_jump": self.max_step_jump,
            "closed": self.closed,
            "halvings": self.halvings,
        }


def section_form(E, G):
    _require_centered(E)
    if G.n != E.n:
        raise ContractViolation("hyperplane and ellipsoid dimensions differ")
    B = hyperplane_basis(G.normal)
    form = B.T @ E.form @ B
    return SectionEllipsoid(G, B, (form + form.T) / 2)


def _groups(values, tol):
    out = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] <= tol * max(abs(values[i]), abs(values[i - 1])):
            out[-1].append(i)
        else:
            out.append([i])
    return out


def section_axes(E, G, grouping_tol=GROUPING_TOL):
    """Axes of ``G ∩ E`` sorted by decreasing length.

    Axes inside a repeated-eigenvalue group are not isolated and come back with
    ``degenerate=True``; any orthonormal choice within the group is returned.
    """
    S = section_form(E, G)
    dec = sym_eigen(S.form)
    degenerate = np.zeros(dec.values.size, dtype=bool)
    for run in _groups(dec.values, grouping_tol):
        if len(run) > 1:
            degenerate[run] = True
    return [
        SectionAxis(ProjLine.from_vector(S.basis @ dec.vectors[:, i]), 2.0 / np.sqrt(mu), bool(degenerate[i]))
        for i, mu in enumerate(dec.values)
    ]


def in_section_binormal_angle(E, G, l):
    """Angle between ``l ⊂ G`` and the in-plane normal of ``M(l) ∩ G``."""
    a = project_off(E.form @ l.dir, G.normal)
    return float(np.arctan2(np.linalg.norm(project_off(a, l.dir)), a @ l.dir))


def _partition(E, partition):
    P = spectrum_partition(E) if partition is None else partition
    if P.k < 2:
        raise SphericalEllipsoid("the ellipsoid is a sphere: there are no diagonal lines")
    return P


def fiber(E, G, tol=BINORMAL_TOL, partition=None):
    """Lines whose ground hyperplane is ``G``: axes of ``G ∩ E`` that are not axes of ``E``."""
    _require_centered(E)
    P = _partition(E, partition)
    lines = []
    degenerate = False
    for ax in section_axes(E, G, P.grouping_tol):
        if binormal_angle(E, ax.line) <= tol:
            continue
        degenerate |= ax.degenerate
        lines.append((ax.line, ax.length))
    result = FiberResult(G, lines, is_generic_hyperplane(E, G, P, tol), degenerate)
    if degenerate:
        raise DegenerateSection("section has a repeated axis length off the eigenspaces", fiber=result)
    return result


def line_margins(E, l, partition):
    """Per-group (projection norm onto V_i, relative length gap to lambda_i)."""
    lam = chord_length(E, l)
    return [
        (float(np.linalg.norm(g.basis.T @ l.dir)), abs(lam - g.binormal_length) / g.binormal_length)
        for g in partition.groups
    ]


def is_generic_line(E, l, partition, tol=SCAN_TOL):
    if partition.k < 2:
        raise SphericalEllipsoid("genericity needs k >= 2")
    return all(p > tol and gap > tol for p, gap in line_margins(E, l, partition))


def hyperplane_margins(G, partition):
    """Norm of the projection of ``G``'s normal onto each eigenspace."""
    return [float(np.linalg.norm(g.basis.T @ G.normal)) for g in partition.groups]


def is_generic_hyperplane(E, G, partition, tol=SCAN_TOL):
    if partition.k < 2:
        raise SphericalEllipsoid("genericity needs k >= 2")
    return min(hyperplane_margins(G, partition)) > tol


def random_hyperplane(n, rng):
    return ProjHyperplane.from_normal(rng.standard_normal(n))


def random_line(n, rng):
    return ProjLine.from_vector(rng.standard_normal(n))


def _scan_one(E, P, tol, seed, index):
    rng = index_rng(seed, index)
    G = random_hyperplane(E.n, rng)
    margin = min(hyperplane_margins(G, P))
    row = {"index": index, "normal": G.normal.tolist(), "accepted": False, "fiber_size": -1, "min_margin": margin}
    if margin <= MARGIN_FACTOR * tol:
        return row
    axes = section_axes(E, G, P.grouping_tol)
    angles = [binormal_angle(E, ax.line) for ax in axes]
    if any(tol < a <= MARGIN_FACTOR * tol for a in angles):
        return row
    if any(ax.degenerate and a > tol for ax, a in zip(axes, angles)):
        return row
    row.update(accepted=True, fiber_size=sum(a > tol for a in angles))
    return row


def cover_scan(E, samples, tol=SCAN_TOL, seed=0, threads=None, grouping_tol=GROUPING_TOL):
    """Histogram of fiber sizes over uniformly random hyperplanes.

    Samples whose normal comes within ``10 * tol`` of some eigenspace's
    orthogonal complement, or whose section has an axis within the same margin
    of the binormal cut-off, are rejected and counted rather than classified.
    """
    _require_centered(E)
    if samples < 1:
        raise ContractViolation("samples must be >= 1")
    P = _partition(E, spectrum_partition(E, grouping_tol))
    rows = pmap(lambda i: _scan_one(E, P, tol, seed, i), range(samples), threads)
    histogram = {}
    for r in rows:
        if r["accepted"]:
            histogram[r["fiber_size"]] = histogram.get(r["fiber_size"], 0) + 1
    rejected = sum(not r["accepted"] for r in rows)
    return CoverScanReport(samples, histogram, rejected, P.k, seed, rows)


def _aligned(u, v):
    return v if u @ v >= 0 else -v


def _midpoint(G1, G2):
    return ProjHyperplane.from_normal(G1.normal + _aligned(G1.normal, G2.normal))


def _match(F1, F2):
    """Nearest-neighbour assignment of fiber F1 onto F2, or None if ambiguous."""
    if F1.size != F2.size:
        return None
    D1, D2 = F1.directions(), F2.directions()
    dist = np.sqrt(np.clip(1.0 - (D1 @ D2.T) ** 2, 0.0, None))
    mapping = []
    for row in dist:
        order = np.argsort(row)
        d1 = row[order[0]]
        if row.size > 1 and row[order[1]] < AMBIGUITY_FACTOR * d1:
            return None
        mapping.append(int(order[0]))
    if len(set(mapping)) != len(mapping):
        return None
    jump = float(max((dist[i, j] for i, j in enumerate(mapping)), default=0.0))
    return mapping, jump


class _Tracker:
    def __init__(self, E, tol, partition, continuity):
        self.E, self.tol, self.P, self.continuity = E, tol, partition, continuity
        self.halvings = 0

    def fiber(self, G):
        try:
            return fiber(self.E, G, self.tol, self.P)
        except DegenerateSection as exc:
            raise SheetCollision(f"degenerate section on the path: {exc}") from exc

    def segment(self, G1, F1, G2, F2, depth=0):
        found = _match(F1, F2)
        if found is not None and found[1] <= self.continuity:
            return found
        if depth >= MAX_HALVINGS:
            raise SheetCollision("ambiguous sheet matching after repeated step halving")
        self.halvings = max(self.halvings, depth + 1)
        Gm = _midpoint(G1, G2)
        Fm = self.fiber(Gm)
        m1, j1 = self.segment(G1, F1, Gm, Fm, depth + 1)
        m2, j2 = self.segment(Gm, Fm, G2, F2, depth + 1)
        return [m2[i] for i in m1], max(j1, j2)


def track_fiber(
    E,
    path,
    tol=SCAN_TOL,
    step_bound=STEP_BOUND,
    continuity=CONTINUITY_THRESHOLD,
    partition=None,
):
    """Continue each fiber point along ``path`` by nearest-neighbour matching.

    Each waypoint must be generic with margin ``10 * tol`` and lie within
    ``step_bound`` (projective distance) of its predecessor. Ambiguous steps
    are bisected up to eight times before ``SheetCollision`` is raised.
    """
    _require_centered(E)
    P = _partition(E, partition)
    path = list(path)
    if not path:
        raise ContractViolation("empty path")
    for i, G in enumerate(path):
        if min(hyperplane_margins(G, P)) <= MARGIN_FACTOR * tol:
            raise ContractViolation(f"waypoint {i} is not generic with margin")
        if i and path[i - 1].distance(G) > step_bound:
            raise StepTooLarge(f"waypoints {i - 1} and {i} are {path[i - 1].distance(G):.3g} apart")
    tracker = _Tracker(E, tol, P, continuity)
    F = tracker.fiber(path[0])
    perm = list(range(F.size))
    max_jump = 0.0
    for G_prev, G in zip(path, path[1:]):
        F_next = tracker.fiber(G)
        mapping, jump = tracker.segment(G_prev, F, G, F_next)
        perm = [mapping[j] for j in perm]
        max_jump = max(max_jump, jump)
        F = F_next
    closed = len(path) > 1 and path[0].distance(path[-1]) <= 1e-12
    return MonodromyResult(path, tuple(perm), max_jump, closed, tracker.halvings)


def chart_loop(G, radius=0.01, steps=64, axes=(0, 1)):
    """Closed loop of hyperplanes around ``G`` in the affine chart at its normal."""
    B = hyperplane_basis(G.normal)
    b1, b2 = B[:, axes[0]], B[:, axes[1]]
    t = np.linspace(0.0, 2 * np.pi, steps + 1)
    loop = [ProjHyperplane.from_normal(G.normal + radius * (np.cos(s) * b1 + np.sin(s) * b2)) for s in t[:-1]]
    return loop + [loop[0]]


def chart_segment(G, tangent, length=0.2, steps=20):
    """Straight path in the chart at ``G`` along the tangent vector ``tangent``."""
    v = unit(project_off(tangent, G.normal))
    return [ProjHyperplane.from_normal(G.normal + s * v) for s in np.linspace(0.0, length, steps + 1)]


def reverse_path(path):
    return list(reversed(path))


def projective_gap(F1, F2):
    """Largest distance from a line of ``F1`` to its nearest line in ``F2``."""
    D1, D2 = F1.directions(), F2.directions()
    return max(min(line_distance(a, b) for b in D2) for a in D1) if len(D1) else 0.0
