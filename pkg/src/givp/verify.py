"""Correctness oracles for a site set against its input graph.

Three independent routes:

* ``exact_guard_check``  works on the per-edge pair annotations. Along an
  edge (local x-axis) the empty circle through pair ``i`` at parameter
  ``y`` has squared radius ``(y - f_i)**2 + o_i**2``; a site ``s`` lies
  strictly inside it iff ``(y - s_x)**2 + s_y**2`` is smaller. The ``y**2``
  terms cancel, so every (site, pair) violation set is a half-line and it
  suffices to test the end points of each stretch on which one pair is the
  nearest. Those stretches are the pieces of a lower envelope of lines.
* ``brute_force_voronoi`` + ``edge_coverage_check``  build every cell by
  half-plane clipping and look for diagram edges lying on each input edge.
* ``sampled_nearest_pair_check``  probes points along each edge.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import shapely
from scipy.spatial import cKDTree

from .geom import LineEq, line_through
from .pslg import Pslg
from .solver import EdgeCoverPlan, Solution

BRUTE_FORCE_CAP = 5000


class VerifyError(ValueError):
    """Inputs to a check are inconsistent or malformed."""


@dataclass
class EdgeResult:
    edge: int
    ok: bool
    reason: str = ""
    where: Optional[List[float]] = None
    site: Optional[List[float]] = None
    circle: Optional[int] = None

    def to_dict(self) -> Dict:
        d = {"edge": self.edge, "status": "PASS" if self.ok else "FAIL"}
        if not self.ok:
            d["reason"] = self.reason
            if self.where is not None:
                d["where"] = self.where
            if self.site is not None:
                d["site"] = self.site
            if self.circle is not None:
                d["circle"] = self.circle
        return d


@dataclass
class CheckReport:
    check: str
    edges: List[EdgeResult] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.edges) and not any(n.startswith("error") for n in self.notes)

    @property
    def failures(self) -> List[EdgeResult]:
        return [e for e in self.edges if not e.ok]

    def summary(self) -> str:
        bad = self.failures
        head = f"{self.check}: {'PASS' if self.ok else 'FAIL'} ({len(self.edges) - len(bad)}/{len(self.edges)} edges)"
        if bad:
            e = bad[0]
            head += f"; edge {e.edge}: {e.reason}"
        return head

    def to_dict(self) -> Dict:
        return {
            "check": self.check,
            "status": "PASS" if self.ok else "FAIL",
            "notes": list(self.notes),
            "edges": [e.to_dict() for e in sorted(self.edges, key=lambda e: e.edge)],
        }


def reports_to_json(reports: Sequence[CheckReport]) -> str:
    ok = all(r.ok for r in reports)
    doc = {"status": "PASS" if ok else "FAIL", "checks": [r.to_dict() for r in reports]}
    return json.dumps(doc, indent=1) + "\n"


# ---------------------------------------------------------------------------
# exact certificate

def envelope(feet: np.ndarray, offs: np.ndarray, lo: float, hi: float) -> Tuple[np.ndarray, np.ndarray]:
    """Lower envelope of ``(y - f_i)**2 + o_i**2`` over ``[lo, hi]``.

    Returns break points ``b_0 = lo < b_1 < ... < b_m = hi`` and the index of
    the minimizing pair on each of the ``m`` pieces. ``feet`` must be sorted.
    """
    # after dropping y**2 every pair is the line  -2 f y + (f**2 + o**2)
    slope = -2.0 * feet
    icpt = feet * feet + offs * offs
    if len(feet) > 1 and np.all(np.diff(feet) > 0):
        # every line survives iff consecutive crossings increase
        x = (icpt[1:] - icpt[:-1]) / (slope[:-1] - slope[1:])
        if np.all(np.diff(x) > 0):
            keep = (x > lo) & (x < hi)
            first = int(np.searchsorted(x, lo, side="right"))
            last = int(np.searchsorted(x, hi, side="left"))
            brk = np.concatenate([[lo], x[keep], [hi]])
            return brk, np.arange(first, last + 1)
    hull: List[int] = []
    starts: List[float] = []
    for i in range(len(feet)):
        while hull:
            j = hull[-1]
            if slope[i] == slope[j]:
                if icpt[i] >= icpt[j]:
                    break
                hull.pop()
                starts.pop()
                continue
            x = (icpt[i] - icpt[j]) / (slope[j] - slope[i])
            if x <= starts[-1]:
                hull.pop()
                starts.pop()
                continue
            hull.append(i)
            starts.append(x)
            break
        else:
            hull.append(i)
            starts.append(-math.inf)
        # a rejected duplicate line leaves the hull unchanged
    starts_a = np.asarray(starts)
    hull_a = np.asarray(hull)
    inside = (starts_a < hi)
    hull_a, starts_a = hull_a[inside], starts_a[inside]
    # drop pieces that end before lo
    ends = np.append(starts_a[1:], math.inf)
    keep = ends > lo
    hull_a, starts_a = hull_a[keep], starts_a[keep]
    starts_a[0] = lo
    return np.append(starts_a, hi), hull_a


def _present(sites_tree: cKDTree, pts: np.ndarray, tol: float) -> np.ndarray:
    if len(pts) == 0:
        return np.zeros(0, dtype=bool)
    d, _ = sites_tree.query(pts, k=1)
    return d <= tol


def _pair_presence(plan: EdgeCoverPlan, tree: cKDTree, tol: float) -> np.ndarray:
    p, q = plan.pair_points()
    return _present(tree, p, tol) & _present(tree, q, tol)


def _check_annotations(plan: EdgeCoverPlan) -> Optional[str]:
    t, o = plan.pair_t, plan.pair_off
    if len(t) == 0:
        return "edge has no sentinel pairs"
    if len(o) != len(t) or not np.all(np.isfinite(t)) or not np.all(np.isfinite(o)):
        return "malformed pair annotations"
    if np.any(o <= 0):
        return "non-positive pair offset"
    if np.any(np.diff(t) < 0):
        return "pair feet are not ordered along the edge"
    if len(plan.circ_t) and (plan.circ_pairs.max(initial=-1) >= len(t)):
        return "circle references an unknown pair"
    return None


def _coverage_gap(plan: EdgeCoverPlan, present: np.ndarray) -> Optional[Tuple[float, float]]:
    """First stretch of the edge not spanned by a complete circle chord."""
    L = plan.length
    iv = []
    if present[0]:
        iv.append((0.0, plan.rho_u))
    if present[-1]:
        iv.append((L - plan.rho_v, L))
    for t, r, pr in zip(plan.circ_t, plan.circ_r, plan.circ_pairs):
        idx = pr[pr >= 0]
        if len(idx) and present[idx].all():
            iv.append((t - r, t + r))
    iv.sort()
    reach = 0.0
    slack = 1e-12 * max(1.0, L)
    for a, b in iv:
        if a > reach + slack:
            return (reach, min(a, L))
        reach = max(reach, b)
        if reach >= L:
            return None
    return None if reach >= L - slack else (reach, L)


def _circle_at(plan: EdgeCoverPlan, y: float) -> Optional[int]:
    if len(plan.circ_t) == 0:
        return None
    inside = np.abs(plan.circ_t - y) <= plan.circ_r
    if inside.any():
        cand = np.nonzero(inside)[0]
        return int(cand[np.argmin(np.abs(plan.circ_t[cand] - y))])
    return None


def exact_guard_check(g: Pslg, sol: Solution, tol: Optional[float] = None) -> CheckReport:
    """Certificate that every edge lies on the diagram of ``sol.sites``."""
    plans = sol.report.plans
    if len(plans) != g.n_edges:
        raise VerifyError(f"solution annotates {len(plans)} edges, graph has {g.n_edges}")
    if tol is None:
        tol = sol.report.tol * max(g.diagonal(), 1.0)
    rep = CheckReport("certificate")
    if len(sol.sites) == 0:
        rep.edges = [EdgeResult(k, False, "no sites") for k in range(g.n_edges)]
        return rep
    tree = cKDTree(sol.sites)
    by_edge = {p.edge: p for p in plans}
    if sorted(by_edge) != list(range(g.n_edges)):
        raise VerifyError("plan edge ids do not match the graph")

    bad_plan: Dict[int, EdgeResult] = {}
    probe_y: List[np.ndarray] = []
    probe_r2: List[np.ndarray] = []
    probe_owner: List[np.ndarray] = []
    for plan in sorted(plans, key=lambda p: p.edge):
        k = plan.edge
        msg = _check_annotations(plan)
        if msg:
            bad_plan[k] = EdgeResult(k, False, msg)
            continue
        present = _pair_presence(plan, tree, tol)
        gap = _coverage_gap(plan, present)
        if gap is not None:
            missing = np.nonzero(~present)[0]
            why = f"coverage gap on [{gap[0]:.9g}, {gap[1]:.9g}]"
            if len(missing):
                why += f"; pair {int(missing[0])} is missing from the sites"
            pt = plan.point_at(0.5 * (gap[0] + gap[1]))
            bad_plan[k] = EdgeResult(k, False, why, where=[float(pt[0]), float(pt[1])])
            continue
        f = plan.pair_t[present]
        o = plan.pair_off[present]
        brk, who = envelope(f, o, 0.0, plan.length)
        # both ends of every piece, evaluated with the piece's own pair
        ys = np.concatenate([brk[:-1], brk[1:]])
        idx = np.concatenate([who, who])
        probe_y.append(ys)
        probe_r2.append((ys - f[idx]) ** 2 + o[idx] ** 2)
        probe_owner.append(np.full(len(ys), k))

    results: Dict[int, EdgeResult] = dict(bad_plan)
    if probe_y:
        ys = np.concatenate(probe_y)
        r2 = np.concatenate(probe_r2)
        owner = np.concatenate(probe_owner)
        org = np.array([by_edge[k].origin for k in range(g.n_edges)])[owner]
        dirs = np.array([by_edge[k].direction for k in range(g.n_edges)])[owner]
        pts = org + ys[:, None] * dirs
        dist, nn = tree.query(pts, k=1)
        r = np.sqrt(r2)
        viol = dist < r - tol
        for k in np.unique(owner):
            sel = np.nonzero(owner == k)[0]
            bad = sel[viol[sel]]
            if len(bad):
                # worst offender on this edge
                b = bad[np.argmax(r[bad] - dist[bad])]
                plan = by_edge[int(k)]
                s = sol.sites[nn[b]]
                results[int(k)] = EdgeResult(
                    int(k), False,
                    f"site ({s[0]:.9g}, {s[1]:.9g}) lies inside the empty circle at t={ys[b]:.9g} "
                    f"(distance {dist[b]:.9g} < radius {r[b]:.9g})",
                    where=[float(pts[b, 0]), float(pts[b, 1])],
                    site=[float(s[0]), float(s[1])],
                    circle=_circle_at(plan, float(ys[b])),
                )
            elif int(k) not in results:
                results[int(k)] = EdgeResult(int(k), True)
    rep.edges = [results[k] for k in sorted(results)]
    return rep


# ---------------------------------------------------------------------------
# brute-force diagram

@dataclass(frozen=True)
class HalfPlane:
    """Points x with ``sign * boundary.value(x) >= 0``."""

    boundary: LineEq
    sign: float

    @classmethod
    def of_pair(cls, p, q) -> "HalfPlane":
        """Side of the bisector of ``p`` and ``q`` that contains ``p``."""
        mx, my = (p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0
        dx, dy = q[0] - p[0], q[1] - p[1]
        line = line_through((mx, my), (mx - dy, my + dx))
        return cls(line, 1.0 if line.value(p) > 0 else -1.0)

    def contains(self, x, tol: float = 0.0) -> bool:
        return self.sign * self.boundary.value(x) >= -tol


@dataclass
class VoronoiDiagram:
    sites: np.ndarray
    box: Tuple[float, float, float, float]
    cells: List[np.ndarray]
    # per cell, the neighbour that produced each polygon side (-1: box side)
    side_owner: List[np.ndarray]

    def area(self) -> float:
        return float(sum(_shoelace(c) for c in self.cells))

    def edge_list(self) -> Tuple[np.ndarray, np.ndarray]:
        """Diagram edges as (segments (m, 2, 2), generating pairs (m, 2)).

        Each shared side appears once, with the lower site index first.
        """
        segs, pairs = [], []
        x0, y0, x1, y1 = self.box
        tiny = 1e-12 * math.hypot(x1 - x0, y1 - y0)
        for i, (poly, own) in enumerate(zip(self.cells, self.side_owner)):
            n = len(poly)
            for s in range(n):
                j = own[s]
                a, b = poly[s], poly[(s + 1) % n]
                # sides collapsed at a vertex shared by several cocircular sites
                if j > i and math.hypot(b[0] - a[0], b[1] - a[1]) > tiny:
                    segs.append((a, b))
                    pairs.append((i, j))
        if not segs:
            return np.empty((0, 2, 2)), np.empty((0, 2), dtype=np.int64)
        return np.asarray(segs, dtype=float), np.asarray(pairs, dtype=np.int64)


def _shoelace(poly: np.ndarray) -> float:
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _clip(poly: List[Tuple[float, float]], own: List[int], p, q, j: int):
    """Keep the part of ``poly`` at least as close to ``p`` as to ``q``."""
    px, py = p
    nx, ny = q[0] - px, q[1] - py
    c = 0.5 * (nx * (q[0] + px) + ny * (q[1] + py))
    vals = [nx * x + ny * y - c for x, y in poly]
    if max(vals) <= 0.0:
        return poly, own, False
    out: List[Tuple[float, float]] = []
    out_own: List[int] = []
    n = len(poly)
    for s in range(n):
        a, va = poly[s], vals[s]
        b, vb = poly[(s + 1) % n], vals[(s + 1) % n]
        if va <= 0.0:
            out.append(a)
            if vb <= 0.0:
                out_own.append(own[s])
            else:
                t = va / (va - vb)
                out_own.append(own[s])
                out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
                out_own.append(j)
        elif vb <= 0.0:
            t = va / (va - vb)
            out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
            out_own.append(own[s])
    return out, out_own, True


def brute_force_voronoi(sites, box: Tuple[float, float, float, float], cap: int = BRUTE_FORCE_CAP) -> VoronoiDiagram:
    """Every cell as ``box`` intersected with all bisector half-planes.

    Neighbours are visited nearest first; once twice the cell's farthest
    vertex distance is below the next neighbour's distance no further
    bisector can cut the cell, which is what keeps this tractable.
    """
    S = np.asarray(sites, dtype=float).reshape(-1, 2)
    n = len(S)
    if n == 0:
        raise VerifyError("no sites")
    if n > cap:
        raise VerifyError(f"{n} sites exceed the brute-force cap of {cap}; use the certificate check")
    x0, y0, x1, y1 = box
    if not (x1 > x0 and y1 > y0):
        raise VerifyError("degenerate box")
    if np.any(S[:, 0] < x0) or np.any(S[:, 0] > x1) or np.any(S[:, 1] < y0) or np.any(S[:, 1] > y1):
        raise VerifyError("site outside the box")
    tree = cKDTree(S)
    if n > 1 and tree.query_pairs(0.0):
        raise VerifyError("duplicate sites")
    square = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    cells, owners = [], []
    for i in range(n):
        p = (float(S[i, 0]), float(S[i, 1]))
        poly = list(square)
        own = [-1, -1, -1, -1]
        k = min(n, 16)
        done = 0
        while True:
            dist, idx = tree.query(S[i], k=k)
            dist = np.atleast_1d(dist)
            idx = np.atleast_1d(idx)
            stop = False
            for dj, j in zip(dist[done:].tolist(), idx[done:].tolist()):
                if j == i:
                    continue
                far = max((vx - p[0]) ** 2 + (vy - p[1]) ** 2 for vx, vy in poly)
                if dj * dj > 4.0 * far:
                    stop = True
                    break
                poly, own, _ = _clip(poly, own, p, (float(S[j, 0]), float(S[j, 1])), j)
            if stop or k >= n:
                break
            done = k
            k = min(n, 4 * k)
        cells.append(np.asarray(poly, dtype=float))
        owners.append(np.asarray(own, dtype=np.int64))
    return VoronoiDiagram(S, box, cells, owners)


def verification_box(g: Pslg, sites=None) -> Tuple[float, float, float, float]:
    x0, y0, x1, y1 = g.bbox()
    m = 2.0 * float(g.lengths.max()) if g.n_edges else 1.0
    box = [x0 - m, y0 - m, x1 + m, y1 + m]
    if sites is not None and len(sites):
        S = np.asarray(sites)
        box = [min(box[0], S[:, 0].min() - m), min(box[1], S[:, 1].min() - m),
               max(box[2], S[:, 0].max() + m), max(box[3], S[:, 1].max() + m)]
    return tuple(float(v) for v in box)


def edge_coverage_check(g: Pslg, vd: VoronoiDiagram, tol: float) -> CheckReport:
    """Every input edge must be a union of diagram edges lying on it whose
    generating sites mirror each other across it."""
    rep = CheckReport("bruteforce")
    segs, pairs = vd.edge_list()
    rep.notes.append(f"diagram: {len(vd.sites)} cells, {len(segs)} edges")
    if len(segs) == 0:
        rep.edges = [EdgeResult(k, False, "diagram has no edges") for k in range(g.n_edges)]
        return rep
    geoms = shapely.linestrings(segs)
    tree = shapely.STRtree(geoms)
    S = vd.sites
    for k, (a_i, b_i) in enumerate(g.edges):
        A, B = g.vertices[a_i], g.vertices[b_i]
        L = float(g.lengths[k])
        d = (B - A) / L
        nrm = np.array([-d[1], d[0]])
        cand = tree.query(shapely.linestrings([A, B]), predicate="dwithin", distance=tol)
        iv = []
        for c in np.atleast_1d(cand):
            s = segs[c]
            off = (s - A) @ nrm
            if np.any(np.abs(off) > tol):
                continue
            p, q = S[pairs[c, 0]], S[pairs[c, 1]]
            mid = 0.5 * (p + q)
            chord = p - q
            # mirrored: midpoint on the edge line, connecting chord normal to it
            if abs((mid - A) @ nrm) > tol or abs(chord @ d) > tol:
                continue
            t = (s - A) @ d
            iv.append((float(t.min()), float(t.max())))
        iv.sort()
        reach = 0.0
        gap = None
        for lo, hi in iv:
            if lo > reach + tol:
                gap = (reach, lo)
                break
            reach = max(reach, hi)
        if gap is None and reach < L - tol:
            gap = (reach, L)
        if gap is None:
            rep.edges.append(EdgeResult(k, True))
        else:
            lo, hi = max(gap[0], 0.0), min(gap[1], L)
            pt = A + 0.5 * (lo + hi) * d
            rep.edges.append(EdgeResult(k, False, f"edge not on the diagram over t in [{lo:.9g}, {hi:.9g}]",
                                        where=[float(pt[0]), float(pt[1])]))
    return rep


# ---------------------------------------------------------------------------
# sampled cross-check

def sampled_nearest_pair_check(g: Pslg, sol: Solution, samples_per_interval: int = 8,
                               tol: Optional[float] = None) -> CheckReport:
    """Probe each stretch between consecutive feet (and the two end stretches).

    A probe passes when the nearest mirrored pair of the edge is as close as
    the nearest site overall.
    """
    if samples_per_interval < 2:
        raise VerifyError("samples_per_interval must be at least 2")
    if tol is None:
        tol = sol.report.tol * max(g.diagonal(), 1.0)
    rep = CheckReport("sampled")
    if len(sol.sites) == 0:
        rep.edges = [EdgeResult(k, False, "no sites") for k in range(g.n_edges)]
        return rep
    tree = cKDTree(sol.sites)
    frac = (np.arange(samples_per_interval) + 0.5) / samples_per_interval
    for plan in sorted(sol.report.plans, key=lambda p: p.edge):
        k = plan.edge
        present = _pair_presence(plan, tree, tol)
        if not present.any():
            rep.edges.append(EdgeResult(k, False, "none of the edge's pairs is among the sites"))
            continue
        f = plan.pair_t[present]
        o = plan.pair_off[present]
        knots = np.concatenate([[0.0], f, [plan.length]])
        lo, hi = knots[:-1], knots[1:]
        ys = (lo[:, None] + frac[None, :] * (hi - lo)[:, None]).ravel()
        pts = plan.point_at(ys)
        dist, nn = tree.query(pts, k=1)
        pair_d = np.sqrt(((ys[:, None] - f[None, :]) ** 2 + o[None, :] ** 2).min(axis=1))
        bad = np.nonzero(pair_d > dist + tol)[0]
        if len(bad):
            b = bad[np.argmax(pair_d[bad] - dist[bad])]
            s = sol.sites[nn[b]]
            rep.edges.append(EdgeResult(
                k, False, f"probe at t={ys[b]:.9g} is nearer to site ({s[0]:.9g}, {s[1]:.9g}) than to any pair",
                where=[float(pts[b, 0]), float(pts[b, 1])], site=[float(s[0]), float(s[1])],
                circle=_circle_at(plan, float(ys[b]))))
        else:
            rep.edges.append(EdgeResult(k, True))
    return rep
