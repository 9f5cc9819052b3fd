"""Acceptance criteria, one test per criterion.

Each test prints a single ``[criterion N] PASS|FAIL ...`` line with the
measured statistic next to its tolerance and the wall time next to its
budget. Run with ``pytest tests/test_acceptance.py -s`` to see them.
"""

import time

import numpy as np
import pytest

from conftest import random_orthogonal
from reflecta.bezdek import bezdek_scan
from reflecta.bodies import ellipsoid_body, perturbed_body, revolution_body, box_body
from reflecta.body import ClassifyConfig, classify_body, fit_mirror, orthogonal_reflection_scan
from reflecta.linalg import hyperplane_basis, line_angle, project_off
from reflecta.mvee import ellipsoid_boundary_points, mvee, relative_form_error
from reflecta.quadric import (
    Ellipsoid,
    ProjHyperplane,
    ProjLine,
    ground,
    is_binormal,
    mirror,
    polar_pair_check,
    reflection_in_direction,
    spectrum_partition,
)
from reflecta.section import (
    chart_loop,
    chart_segment,
    cover_scan,
    fiber,
    in_section_binormal_angle,
    is_generic_hyperplane,
    reverse_path,
    track_fiber,
)

REV_PROFILES = [
    [(-1.0, 0.0), (-0.6, 0.8), (0.4, 1.0), (1.0, 0.3)],
    [(-1.2, 0.4), (-0.5, 0.9), (0.3, 0.95), (0.9, 0.5), (1.1, 0.0)],
]


def report(number, ok, detail, elapsed, budget):
    status = "PASS" if ok and elapsed < budget else "FAIL"
    print(f"\n[criterion {number}] {status} {detail}; {elapsed:.1f}s (budget {budget:g}s)")
    return status == "PASS"


def spd(n, rng, low=0.1, high=10.0):
    Q = random_orthogonal(n, rng)
    A = (Q * rng.uniform(low, high, n)) @ Q.T
    return (A + A.T) / 2


def grouped(dims, levels, rng=None):
    values = np.repeat(levels, dims)
    if rng is None:
        return Ellipsoid.centered(np.diag(values))
    Q = random_orthogonal(values.size, rng)
    A = (Q * values) @ Q.T
    return Ellipsoid.centered((A + A.T) / 2)


def accepted_histogram(E, wanted=1000, seed=0):
    """Cover scan grown until ``wanted`` samples are accepted; first ``wanted`` are tallied."""
    samples = wanted
    while True:
        rep = cover_scan(E, samples, seed=seed)
        if rep.accepted >= wanted:
            break
        samples += wanted - rep.accepted + 10
    rows = [r for r in rep.rows if r["accepted"]][:wanted]
    hist = {}
    for r in rows:
        hist[r["fiber_size"]] = hist.get(r["fiber_size"], 0) + 1
    return hist, rep.rejected_nongeneric, rep.samples


def test_criterion_1_covering_cardinality():
    rng = np.random.default_rng(1)
    cases = {
        (3, 2): ([1, 2], [1.0, 0.25]),
        (3, 3): ([1, 1, 1], [1.0, 0.25, 1 / 9]),
        (4, 3): ([2, 1, 1], [1.0, 0.25, 1 / 9]),
        (5, 4): ([2, 1, 1, 1], [1.0, 0.25, 1 / 9, 1 / 16]),
        (6, 3): ([2, 2, 2], [1.0, 0.25, 1 / 9]),
    }
    start = time.perf_counter()
    ok, worst_rej, lines = True, 0.0, []
    for (n, k), (dims, levels) in cases.items():
        rand_levels = np.sort(rng.uniform(0.05, 2.0, k))[::-1]
        for tag, E in (("fixed", grouped(dims, levels)), ("random", grouped(rng.permutation(dims), rand_levels, rng))):
            assert spectrum_partition(E).k == k
            hist, rejected, drawn = accepted_histogram(E)
            exact = hist == {k - 1: 1000}
            rej = rejected / drawn
            ok &= exact and rej < 0.05
            worst_rej = max(worst_rej, rej)
            lines.append(f"({n},{k}) {tag}: {hist} rejected {rejected}/{drawn}")
    elapsed = time.perf_counter() - start
    print("\n  " + "\n  ".join(lines))
    assert report(1, ok, f"all accepted fibers have k-1 lines, max rejection {worst_rej:.3%} (< 5%)", elapsed, 30)


def test_criterion_2_polarity():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    bad, polar = 0, 0
    for i in range(10_000):
        n = int(rng.integers(2, 7))
        E = Ellipsoid.centered(spd(n, rng))
        l1 = ProjLine.from_vector(rng.standard_normal(n))
        v = rng.standard_normal(n)
        if i % 2:
            a = E.form @ l1.dir
            v = v - (v @ a) / (a @ a) * a
        l2 = ProjLine.from_vector(v)
        fwd, bwd = polar_pair_check(E, l1, l2), polar_pair_check(E, l2, l1)
        oracle = abs(l2.dir @ E.form @ l1.dir) <= 1e-10 * np.linalg.norm(E.form)
        polar += oracle
        bad += not (fwd == bwd == oracle)
    elapsed = time.perf_counter() - start
    assert report(2, bad == 0, f"{bad} asymmetric or wrong of 10000 ({polar} polar pairs)", elapsed, 5)


def test_criterion_3_reflection_algebra():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 7))
        E = Ellipsoid.centered(spd(n, rng))
        l = ProjLine.from_vector(rng.standard_normal(n))
        assert not is_binormal(E, l)
        r = reflection_in_direction(E, l)
        R, A = r.linear, E.form
        fixed = hyperplane_basis(r.mirror.normal)
        worst = max(
            worst,
            np.max(np.abs(R @ R - np.eye(n))),
            np.max(np.abs(R.T @ A @ R - A)),
            np.max(np.abs(R @ fixed - fixed)),
        )
    elapsed = time.perf_counter() - start
    assert report(3, worst <= 1e-10, f"max deviation {worst:.2e} (<= 1e-10)", elapsed, 5)


@pytest.mark.xfail(
    strict=True,
    reason="tan(in-section angle) = tan(angle(l, A l)) * sin(angle(H, ground)), so no fixed "
    "margin holds for hyperplanes near the ground or lines near an axis; uniform draws in R^3 land there",
)
def test_criterion_4_ground_uniqueness():
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst_own, min_other, offenders = 0.0, np.inf, []
    for _ in range(100):
        n = int(rng.integers(3, 7))
        E = Ellipsoid.centered(spd(n, rng))
        l = ProjLine.from_vector(rng.standard_normal(n))
        G = ground(E, l)
        worst_own = max(worst_own, in_section_binormal_angle(E, G, l))
        for _ in range(50):
            H = ProjHyperplane.from_normal(project_off(rng.standard_normal(n), l.dir))
            angle = in_section_binormal_angle(E, H, l)
            min_other = min(min_other, angle)
            if angle <= 1e-3:
                offenders.append((n, angle, H.distance(G)))
    elapsed = time.perf_counter() - start
    for n, angle, dist in offenders:
        print(f"\n  n={n}: other hyperplane angle {angle:.2e} at distance {dist:.2e} from the ground plane")
    ok = worst_own <= 1e-8 and not offenders
    detail = f"own-section angle {worst_own:.1e} (<= 1e-8), min other angle {min_other:.2e} (> 1e-3)"
    assert report(4, ok, detail, elapsed, 10)


def test_criterion_5_ground_fiber_duality():
    rng = np.random.default_rng(5)
    E = Ellipsoid.diagonal([1.0, 0.25, 1 / 9, 1 / 16])
    P = spectrum_partition(E)
    start = time.perf_counter()
    worst, count = 0.0, 0
    while count < 500:
        G = ProjHyperplane.from_normal(rng.standard_normal(E.n))
        if not is_generic_hyperplane(E, G, P):
            continue
        count += 1
        for l, _ in fiber(E, G, partition=P).lines:
            worst = max(worst, ground(E, l).distance(G))
    elapsed = time.perf_counter() - start
    assert report(5, worst <= 1e-8, f"max projective distance {worst:.2e} (<= 1e-8)", elapsed, 20)


def test_criterion_6_monodromy():
    rng = np.random.default_rng(6)
    E = Ellipsoid.diagonal([1.0, 0.25, 1 / 9, 1 / 16])
    P = spectrum_partition(E)
    start = time.perf_counter()
    loops_ok, paths_ok = 0, 0
    while loops_ok + paths_ok < 200:
        G = ProjHyperplane.from_normal(rng.standard_normal(E.n))
        if min(np.linalg.norm(g.basis.T @ G.normal) for g in P.groups) < 0.1:
            continue
        ident = tuple(range(P.k - 1))
        if loops_ok < 100:
            axes = tuple(rng.choice(E.n - 1, size=2, replace=False))
            res = track_fiber(E, chart_loop(G, radius=rng.uniform(0.005, 0.05), steps=48, axes=axes), partition=P)
            assert res.closed
            loops_ok += res.permutation == ident
            if res.permutation != ident:
                break
        else:
            path = chart_segment(G, rng.standard_normal(E.n), length=0.2, steps=10)
            fwd = track_fiber(E, path, partition=P)
            back = track_fiber(E, reverse_path(path), partition=P)
            composed = tuple(back.permutation[j] for j in fwd.permutation)
            if composed != ident:
                break
            paths_ok += 1
    elapsed = time.perf_counter() - start
    ok = loops_ok == 100 and paths_ok == 100
    assert report(6, ok, f"{loops_ok}/100 loops identity, {paths_ok}/100 reversals identity", elapsed, 60)


def test_criterion_7_mirror_fit_exact_bodies():
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    worst_res, worst_angle = 0.0, 0.0
    for i in range(200):
        if i % 20 == 0:
            E = Ellipsoid.from_axes(rng.uniform(0.5, 2.5, 3), random_orthogonal(3, rng))
            K = ellipsoid_body(Ellipsoid(rng.uniform(-5, 5, 3), E.form))
        l = ProjLine.from_vector(rng.standard_normal(3))
        fit = fit_mirror(K, l)
        worst_res = max(worst_res, fit.residual_rms)
        worst_angle = max(worst_angle, line_angle(fit.normal, mirror(E, l).normal))
    elapsed = time.perf_counter() - start
    ok = worst_res <= 1e-6 and worst_angle <= 1e-6
    detail = f"max residual {worst_res:.1e}, max mirror angle {worst_angle:.1e} (<= 1e-6)"
    assert report(7, ok, detail, elapsed, 60)


def test_criterion_8_classification():
    rng = np.random.default_rng(8)
    threshold = 1e-3
    bodies = []
    for i in range(3):
        E = Ellipsoid.from_axes(rng.uniform(0.6, 2.0, 3), random_orthogonal(3, rng), rng.uniform(-1, 1, 3))
        bodies.append((ellipsoid_body(E, f"ellipsoid{i}"), "ellipsoid"))
    for i, profile in enumerate(REV_PROFILES):
        axis = rng.standard_normal(3)
        bodies.append((revolution_body(profile, axis=axis, center=rng.uniform(-1, 1, 3), label=f"revolution{i}"),
                       "rotational"))
    for i in range(2):
        E = Ellipsoid.from_axes(rng.uniform(0.8, 2.0, 3), random_orthogonal(3, rng))
        bumps = rng.normal(0.0, 1.2, (3, 3))
        bodies.append((perturbed_body(E, bumps, 0.6, f"perturbed{i}"), "other"))
    start = time.perf_counter()
    ok, lines = True, []
    for K, expected in bodies:
        c = classify_body(K, ClassifyConfig(threshold=threshold))
        good = c.verdict == expected and c.margin >= 10
        ok &= good
        lines.append(f"{K.label}: {c.verdict} (expected {expected}), margin {c.margin:.3g}")
    elapsed = time.perf_counter() - start
    print("\n  " + "\n  ".join(lines))
    assert report(8, ok, "7 verdicts with evidence margins >= 10x threshold", elapsed, 300)


def test_criterion_9_bezdek_scans():
    rng = np.random.default_rng(9)
    E = Ellipsoid.from_axes([1.0, 1.5, 2.0], random_orthogonal(3, rng), np.array([0.2, -0.1, 0.3]))
    bodies = [
        (ellipsoid_body(E), ">="),
        (revolution_body(REV_PROFILES[0], axis=(0.3, -0.2, 1.0)), ">="),
        (perturbed_body(Ellipsoid.from_axes([1.0, 1.5, 2.0]), [[1.5, 0.3, 0.0], [-0.4, 1.2, 0.8], [0.2, -0.9, 1.4]], 0.4),
         "<="),
    ]
    start = time.perf_counter()
    ok, lines = True, []
    for K, sense in bodies:
        rep = bezdek_scan(K, samples=200, seed=9)
        good = rep.fraction_strong >= 0.99 if sense == ">=" else rep.fraction_strong <= 0.02
        ok &= good
        lines.append(f"{K.label}: fraction_strong {rep.fraction_strong:.3f} over {rep.nonempty} planes "
                     f"(fraction_bezdek {rep.fraction_bezdek:.3f})")
    elapsed = time.perf_counter() - start
    print("\n  " + "\n  ".join(lines))
    assert report(9, ok, ">= 0.99 for ellipsoid and revolution, <= 0.02 perturbed", elapsed, 300)


def test_criterion_10_mvee():
    start = time.perf_counter()
    E = Ellipsoid.diagonal([1.0, 0.25, 1 / 9])
    fit = mvee(ellipsoid_boundary_points(E, 1000, np.random.default_rng(10)))
    err = relative_form_error(fit.ellipsoid.form, E.form)
    sq = mvee(np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float), eps=1e-9).ellipsoid
    sq_err = max(np.max(np.abs(sq.form - np.eye(2) / 2)), np.max(np.abs(sq.center)))
    elapsed = time.perf_counter() - start
    ok = err <= 1e-3 and sq_err <= 1e-6
    detail = f"form error {err:.1e} (<= 1e-3), square circle error {sq_err:.1e} (<= 1e-6)"
    assert report(10, ok, detail, elapsed, 30)


def test_criterion_11_orthogonal_finiteness():
    rng = np.random.default_rng(11)
    Q = random_orthogonal(3, rng)
    tri = ellipsoid_body(Ellipsoid.from_axes([1.0, 1.5, 2.2], Q, np.array([0.3, 0.0, -0.2])))
    box = box_body([0.8, 1.3, 2.0], [0.1, 0.2, 0.0], random_orthogonal(3, rng))
    rev = revolution_body(REV_PROFILES[0], axis=(0.2, 0.4, 1.0))
    start = time.perf_counter()
    r_tri = orthogonal_reflection_scan(tri)
    r_box = orthogonal_reflection_scan(box)
    r_rev = orthogonal_reflection_scan(rev)
    elapsed = time.perf_counter() - start
    tri_axes = all(min(line_angle(l.dir, q) for q in Q.T) < 1e-4 for l in r_tri.lines)
    ok = len(r_tri.lines) == 3 and tri_axes and not r_tri.nonfinite
    ok &= len(r_box.lines) == 3 and not r_box.nonfinite
    ok &= r_rev.nonfinite
    detail = (f"ellipsoid {len(r_tri.lines)} lines, box {len(r_box.lines)} lines, "
              f"revolution non-finite flag {r_rev.nonfinite}")
    assert report(11, ok, detail, elapsed, 120)
