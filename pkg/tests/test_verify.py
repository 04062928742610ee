import json
import math

import numpy as np
import pytest

from givp import build_pslg
from givp.solver import Solution, SolverConfig, solution_from_dict, solve
from givp.tessgen import TessGenConfig, generate
from givp.verify import (BRUTE_FORCE_CAP, HalfPlane, VerifyError, brute_force_voronoi, edge_coverage_check,
                         envelope, exact_guard_check, reports_to_json, sampled_nearest_pair_check,
                         verification_box)

from conftest import triangle

VARIANTS = ("naive", "sequential", "recursive")


def with_sites(sol, sites):
    return Solution(np.asarray(sites, dtype=float), sol.report)


def transformed(g, sol, scale, angle, shift):
    """Apply x -> scale * R(angle) x + shift to the graph and the solution."""
    c, s = math.cos(angle), math.sin(angle)
    R = np.array([[c, -s], [s, c]])

    def T(p):
        return scale * np.asarray(p) @ R.T + shift

    h = build_pslg(T(g.vertices), g.edges)
    doc = sol.to_dict()
    doc["sites"] = T(sol.sites).tolist()
    eu, _ = h.ends[:, 0], h.ends[:, 1]
    for item, plan in zip(doc["report"]["plans"], sol.report.plans):
        k = plan.edge
        flip = int(h.ends[k, 0]) != plan.u
        L = scale * plan.length
        pairs = [[scale * t, scale * o] for t, o in item["pairs"]]
        circles = [[scale * t, scale * r, i, j] for t, r, i, j in item["circles"]]
        rho = [scale * r for r in item["rho"]]
        if flip:
            n = len(pairs)
            pairs = [[L - t, o] for t, o in reversed(pairs)]
            remap = lambda i: -1 if i < 0 else n - 1 - i  # noqa: E731
            circles = sorted([[L - t, r, remap(i), remap(j)] for t, r, i, j in circles])
            rho = rho[::-1]
        item["pairs"], item["circles"], item["rho"] = pairs, circles, rho
    return h, solution_from_dict(h, json.loads(json.dumps(doc)))


# ---------------------------------------------------------------------------
# brute-force diagram

def test_two_sites_split_by_bisector():
    vd = brute_force_voronoi([[0, 0], [2, 0]], (-10, -10, 10, 10))
    segs, pairs = vd.edge_list()
    assert len(segs) == 1
    assert np.allclose(segs[0][:, 0], 1.0)
    assert sorted(segs[0][:, 1]) == pytest.approx([-10, 10])
    assert [_area(c) for c in vd.cells] == pytest.approx([220, 180])


def test_single_site_owns_box():
    vd = brute_force_voronoi([[1, 2]], (-10, -10, 10, 10))
    assert vd.area() == pytest.approx(400)
    assert len(vd.edge_list()[0]) == 0


def test_equilateral_sites_meet_at_circumcenter():
    S = np.array([[0, 0], [2, 0], [1, math.sqrt(3)]])
    vd = brute_force_voronoi(S, (-10, -10, 10, 10))
    centre = np.array([1, math.sqrt(3) / 3])
    segs, _ = vd.edge_list()
    assert len(segs) == 3
    ends = segs.reshape(-1, 2)
    hits = np.hypot(*(ends - centre).T) < 1e-9
    assert hits.sum() == 3


@pytest.mark.parametrize("bad, match", [
    ([[0, 0], [0, 0]], "duplicate"),
    ([[20, 0]], "outside"),
    (np.empty((0, 2)), "no sites"),
])
def test_brute_force_rejects(bad, match):
    with pytest.raises(VerifyError, match=match):
        brute_force_voronoi(bad, (-10, -10, 10, 10))


def test_brute_force_cap():
    S = np.random.default_rng(0).uniform(0, 1, (11, 2))
    with pytest.raises(VerifyError, match="cap"):
        brute_force_voronoi(S, (0, 0, 1, 1), cap=10)
    assert BRUTE_FORCE_CAP == 5000


def _area(poly):
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


@pytest.mark.parametrize("seed", range(3))
def test_cells_tile_and_vertices_equidistant(seed):
    rng = np.random.default_rng(seed)
    S = rng.uniform(0, 100, (150, 2))
    box = (-20, -20, 120, 120)
    vd = brute_force_voronoi(S, box)
    assert vd.area() == pytest.approx(140 * 140, rel=1e-6)
    for i, (cell, own) in enumerate(zip(vd.cells, vd.side_owner)):
        # convex, counter-clockwise and containing its site
        e = np.roll(cell, -1, axis=0) - cell
        w = np.roll(e, -1, axis=0)
        assert np.all(e[:, 0] * w[:, 1] - e[:, 1] * w[:, 0] >= -1e-9)
        assert np.all((S[i] - cell)[:, 1] * e[:, 0] - (S[i] - cell)[:, 0] * e[:, 1] >= -1e-9)
        n = len(cell)
        for s in range(n):
            v = cell[s]
            on_box = min(abs(v[0] - box[0]), abs(v[0] - box[2]), abs(v[1] - box[1]), abs(v[1] - box[3])) < 1e-9
            if on_box:
                continue
            # a vertex is shared by the sites owning its two incident sides
            j, k = own[s - 1], own[s]
            d = [math.dist(v, S[m]) for m in (i, j, k)]
            assert max(d) - min(d) <= 1e-7 * max(d)


def test_halfplane_keeps_own_site():
    h = HalfPlane.of_pair((0, 0), (2, 0))
    assert h.contains((0.5, 7)) and not h.contains((1.5, -3))
    assert h.contains((1, 0), tol=1e-12)


# ---------------------------------------------------------------------------
# edge coverage against the diagram

def test_coverage_mirrored_pair():
    g = build_pslg([[-5, 0], [5, 0]], [[0, 1]])
    vd = brute_force_voronoi([[0, 1], [0, -1]], (-9, -9, 9, 9))
    assert edge_coverage_check(g, vd, 1e-9).ok


def test_coverage_tilted_bisector():
    g = build_pslg([[-5, 0], [5, 0]], [[0, 1]])
    vd = brute_force_voronoi([[0, 1], [1, -1]], (-9, -9, 9, 9))
    rep = edge_coverage_check(g, vd, 1e-9)
    assert not rep.ok
    assert "not on the diagram" in rep.failures[0].reason


def test_full_pipeline_forty_edges():
    g = generate(TessGenConfig(101, 10, 14))
    assert 30 <= g.n_edges <= 60
    sol = solve(g)
    vd = brute_force_voronoi(sol.sites, verification_box(g, sol.sites))
    assert edge_coverage_check(g, vd, 1e-6 * g.diagonal()).ok


def test_verification_box_margin(tri):
    x0, y0, x1, y1 = verification_box(tri)
    assert (x0, y0) == pytest.approx((-8, -8))
    assert x1 == pytest.approx(12)


# ---------------------------------------------------------------------------
# certificate

def test_envelope_single_and_fast_path():
    brk, who = envelope(np.array([1.0]), np.array([0.5]), 0.0, 2.0)
    assert list(brk) == [0.0, 2.0] and list(who) == [0]
    f = np.array([0.0, 1.0, 2.0, 3.0])
    o = np.full(4, 0.3)
    brk, who = envelope(f, o, 0.0, 3.0)
    assert list(who) == [0, 1, 2, 3]
    assert brk == pytest.approx([0, 0.5, 1.5, 2.5, 3])


def test_envelope_stack_path_drops_hidden_pair():
    # the middle pair sits so far off the edge that it is never nearest
    f = np.array([0.0, 1.0, 2.0])
    o = np.array([0.1, 5.0, 0.1])
    brk, who = envelope(f, o, 0.0, 2.0)
    assert list(who) == [0, 2]
    assert brk == pytest.approx([0, 1, 2])


def test_envelope_matches_pointwise_minimum():
    rng = np.random.default_rng(3)
    for _ in range(50):
        f = np.sort(rng.uniform(0, 10, 8))
        o = rng.uniform(0.1, 2, 8)
        brk, who = envelope(f, o, 0.0, 10.0)
        mids = 0.5 * (brk[:-1] + brk[1:])
        best = np.argmin((mids[:, None] - f) ** 2 + o ** 2, axis=1)
        assert np.array_equal(best, who)


@pytest.mark.parametrize("variant", VARIANTS)
def test_certificate_passes_triangle(tri, variant):
    rep = exact_guard_check(tri, solve(tri, SolverConfig(variant=variant)))
    assert rep.ok
    assert rep.summary().startswith("certificate: PASS (3/3 edges)")


def test_injected_site_fails_naming_circle(tri):
    sol = solve(tri, SolverConfig(variant="sequential"))
    plan = next(p for p in sol.report.plans if len(p.circ_t))
    centre = plan.point_at(plan.circ_t[0])
    bad = with_sites(sol, np.vstack([sol.sites, centre]))
    rep = exact_guard_check(tri, bad)
    assert not rep.ok
    fail = next(f for f in rep.failures if f.edge == plan.edge)
    assert fail.circle == 0
    assert fail.site == pytest.approx(list(centre))
    assert "inside the empty circle" in fail.reason
    assert not sampled_nearest_pair_check(tri, bad).ok


def test_deleted_pair_leaves_gap(tri):
    sol = solve(tri, SolverConfig(variant="recursive"))
    plan = sol.report.plans[1]
    p, q = plan.pair_points()
    i = len(p) // 2
    keep = [s for s in sol.sites if min(math.dist(s, p[i]), math.dist(s, q[i])) > 1e-9]
    rep = exact_guard_check(tri, with_sites(sol, keep))
    fail = next(f for f in rep.failures if f.edge == 1)
    assert "coverage gap" in fail.reason
    assert f"pair {i} is missing" in fail.reason


def test_mismatched_solution_raises(tri):
    sol = solve(tri)
    sol.report.plans.pop()
    with pytest.raises(VerifyError):
        exact_guard_check(tri, sol)


def test_report_json_sorted_and_parsable(tri):
    sol = solve(tri)
    doc = json.loads(reports_to_json([exact_guard_check(tri, sol), sampled_nearest_pair_check(tri, sol)]))
    assert doc["status"] == "PASS"
    assert [e["edge"] for e in doc["checks"][0]["edges"]] == [0, 1, 2]


@pytest.mark.parametrize("scale, angle, shift", [(1.0, 0.0, (0, 0)), (1e-3, 0.3, (5, -2)),
                                                 (250.0, 2.0, (-1e3, 40)), (7.0, math.pi, (0.5, 0.5))])
def test_certificate_invariant_under_similarity(scale, angle, shift):
    g = generate(TessGenConfig(5, 15, 25))
    sol = solve(g, SolverConfig(variant="sequential"))
    plan = next(p for p in sol.report.plans if len(p.circ_t))
    bad = with_sites(sol, np.vstack([sol.sites, plan.point_at(plan.circ_t[0])]))
    for s, expect in ((sol, True), (bad, False)):
        h, moved = transformed(g, s, scale, angle, np.array(shift, float))
        assert exact_guard_check(h, moved).ok is expect


# ---------------------------------------------------------------------------
# sampled check

def test_sampled_single_edge_symmetry():
    g = build_pslg([[0, 0], [10, 0]], [[0, 1]])
    sol = solve(g, SolverConfig(variant="naive"))
    assert sampled_nearest_pair_check(g, sol, 2).ok
    with pytest.raises(VerifyError):
        sampled_nearest_pair_check(g, sol, 1)


@pytest.mark.parametrize("seed", range(8))
def test_certificate_implies_diagram_and_samples(seed):
    g = generate(TessGenConfig(100 + seed, 6, 10))
    for variant in VARIANTS:
        sol = solve(g, SolverConfig(variant=variant))
        assert exact_guard_check(g, sol).ok
        assert sampled_nearest_pair_check(g, sol).ok
        if len(sol.sites) > BRUTE_FORCE_CAP:
            continue
        vd = brute_force_voronoi(sol.sites, verification_box(g, sol.sites))
        assert edge_coverage_check(g, vd, 1e-6 * g.diagonal()).ok
