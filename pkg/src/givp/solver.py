"""Sentinel placement: a site set whose Voronoi diagram contains every edge.

Every edge ``e = (u, v)`` is handled in its own frame: parameter ``t`` runs
from ``u`` (t = 0) to ``v`` (t = length) and a sentinel pair with foot ``t``
and offset ``o`` is the two points ``u + t*d +/- o*n``. Each vertex gets an
initial circle; each edge then gets inner circles centered on it covering
the stretch between the two initial feet.

Three inner-circle strategies are provided:

* ``naive``      radius-epsilon circles, one pair at each center;
* ``sequential`` greedy circles grown one after another, adjacent circles
                 sharing a pair;
* ``recursive``  largest admissible circle at the middle of the unguarded
                 stretch, then recurse on both remainders.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
import shapely

from .geom import Circle, Point, point_segment_distance
from .pslg import Pslg, PslgError, metrics, vertex_clearance

VARIANTS = ("naive", "sequential", "recursive")

# Clearance, in units of epsilon, that every point of an edge's middle
# stretch keeps from all other edges. A pair's guarded circles reach at
# most sqrt(2)*epsilon from the edge and foreign sentinels sit within
# epsilon of their own edge.
SECURITY = 1.0 + math.sqrt(2.0)


class SolverError(ValueError):
    """The input cannot be solved with the requested configuration."""


@dataclass(frozen=True)
class SolverConfig:
    variant: str = "sequential"
    safety: float = 0.995
    tol: float = 1e-9
    epsilon_override: Optional[float] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise SolverError(f"unknown variant {self.variant!r}; expected one of {{{', '.join(VARIANTS)}}}")
        if not 0.0 < self.safety < 1.0:
            raise SolverError(f"safety must be in (0, 1), got {self.safety}")
        if self.tol < 0:
            raise SolverError("tol must be non-negative")
        if self.epsilon_override is not None and not self.epsilon_override > 0:
            raise SolverError("epsilon_override must be positive")


@dataclass(frozen=True)
class InitialCircle:
    vertex: int
    radius: float


@dataclass(frozen=True)
class SentinelPair:
    p: Point
    q: Point
    edge: int
    foot: Point
    offset: float


@dataclass(frozen=True)
class CoverCircle:
    circle: Circle
    pairs: Tuple[int, ...]


@dataclass
class EdgeCoverPlan:
    """Ordered sentinel pairs and inner circles of one edge.

    ``pair_t``/``pair_off`` hold the feet and offsets sorted along the edge;
    the first and last entries are the pairs on the two initial circles.
    ``circ_pairs`` rows index into the pair arrays (-1 for "no second pair").
    """

    edge: int
    u: int
    v: int
    origin: np.ndarray
    direction: np.ndarray
    length: float
    rho_u: float
    rho_v: float
    pair_t: np.ndarray
    pair_off: np.ndarray
    circ_t: np.ndarray
    circ_r: np.ndarray
    circ_pairs: np.ndarray

    @property
    def normal(self) -> np.ndarray:
        return np.array([-self.direction[1], self.direction[0]])

    def point_at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.origin + t[..., None] * self.direction

    @property
    def w1(self) -> Point:
        return Point(*self.point_at(self.pair_t[0]))

    @property
    def w2(self) -> Point:
        return Point(*self.point_at(self.pair_t[-1]))

    @property
    def delta(self) -> float:
        return max(0.0, float(self.pair_t[-1] - self.pair_t[0]))

    @property
    def n_circles(self) -> int:
        return len(self.circ_t)

    def pair_points(self) -> Tuple[np.ndarray, np.ndarray]:
        feet = self.point_at(self.pair_t)
        off = self.pair_off[:, None] * self.normal
        return feet + off, feet - off

    def pairs(self) -> Iterator[SentinelPair]:
        p, q = self.pair_points()
        feet = self.point_at(self.pair_t)
        for k in range(len(self.pair_t)):
            yield SentinelPair(Point(*p[k]), Point(*q[k]), self.edge, Point(*feet[k]), float(self.pair_off[k]))

    @property
    def circles(self) -> List[CoverCircle]:
        centers = self.point_at(self.circ_t)
        return [
            CoverCircle(Circle(Point(*centers[k]), float(self.circ_r[k])),
                        tuple(int(i) for i in self.circ_pairs[k] if i >= 0))
            for k in range(len(self.circ_t))
        ]

    def to_dict(self) -> Dict:
        return {
            "edge": self.edge,
            "rho": [self.rho_u, self.rho_v],
            "pairs": np.column_stack([self.pair_t, self.pair_off]).tolist(),
            "circles": [[float(t), float(r), int(i), int(j)]
                        for t, r, (i, j) in zip(self.circ_t, self.circ_r, self.circ_pairs)],
        }


@dataclass
class SolveReport:
    variant: str
    alpha: float
    rho0: float
    epsilon: float
    safety: float
    tol: float
    rho: np.ndarray
    plans: List[EdgeCoverPlan]
    d_feat: float = math.inf

    @property
    def counts(self) -> Dict[str, int]:
        n_pairs = sum(len(p.pair_t) for p in self.plans)
        initial = 2 * len(self.plans)
        return {
            "sites": 2 * n_pairs,
            "pairs": n_pairs,
            "initial_pairs": initial,
            "inner_pairs": n_pairs - initial,
            "inner_circles": sum(p.n_circles for p in self.plans),
        }

    def to_dict(self, plans: bool = True) -> Dict:
        doc = {
            "alpha": self.alpha,
            "rho0": self.rho0,
            "epsilon": self.epsilon,
            "variant": self.variant,
            "safety": self.safety,
            "tol": self.tol,
            "counts": self.counts,
        }
        if plans:
            doc["plans"] = [p.to_dict() for p in self.plans]
        return doc


@dataclass
class Solution:
    sites: np.ndarray
    report: SolveReport

    def to_dict(self) -> Dict:
        return {"sites": self.sites.tolist(), "report": self.report.to_dict()}


# ---------------------------------------------------------------------------
# prologue: initial circles, epsilon, initial sentinels

def smallest_angle(g: Pslg) -> float:
    """Smallest angle between consecutive edges at a vertex; pi when no two
    edges meet, since the angle bound then constrains nothing."""
    try:
        return metrics(g).alpha
    except PslgError:
        return math.pi


def initial_circles(g: Pslg, cfg: SolverConfig, alpha: Optional[float] = None,
                    clearance: Optional[np.ndarray] = None) -> Dict[int, InitialCircle]:
    """Radius per vertex: the initial circle stays clear of incident-edge
    neighbours (half the shortest incident edge) and of every non-incident
    edge together with that edge's sentinels."""
    if alpha is None:
        alpha = smallest_angle(g)
    if clearance is None:
        clearance = vertex_clearance(g)
    radii = _initial_radii(g, cfg.safety, alpha, clearance)
    return {v: InitialCircle(v, float(r)) for v, r in enumerate(radii) if g.degree[v] > 0}


def _initial_radii(g: Pslg, safety: float, alpha: float, clearance: np.ndarray) -> np.ndarray:
    lam = np.full(g.n_vertices, math.inf)
    np.minimum.at(lam, g.edges[:, 0], g.lengths)
    np.minimum.at(lam, g.edges[:, 1], g.lengths)
    if np.any(clearance <= 0):
        v = int(np.nonzero(clearance <= 0)[0][0])
        raise SolverError(f"vertex {v} lies on a non-incident edge")
    reach = clearance / (1.0 + math.sin(alpha / 2.0))
    return safety * np.minimum(lam / 2.0, reach)


def epsilon_bounds(alpha: float, rho0: float, d_feat: float) -> Tuple[float, float]:
    """Upper bounds on epsilon from vertex angles and from non-adjacent edges."""
    s = math.sin(alpha) if alpha < math.pi / 2 else 1.0
    return rho0 * s / (SECURITY + 2.0 * s), d_feat / SECURITY


def choose_epsilon(g: Pslg, circles, cfg: SolverConfig, alpha: Optional[float] = None,
                   d_feat: Optional[float] = None) -> float:
    if alpha is None:
        alpha = smallest_angle(g)
    if d_feat is None:
        d_feat = float(vertex_clearance(g).min())
    radii = [c.radius for c in circles.values()] if isinstance(circles, dict) else list(circles)
    rho0 = min(radii)
    by_angle, by_feat = epsilon_bounds(alpha, rho0, d_feat)
    limit = min(by_angle, by_feat)
    if cfg.epsilon_override is not None:
        if cfg.epsilon_override > limit:
            raise SolverError(f"epsilon_override {cfg.epsilon_override} exceeds the admissible bound {limit}")
        eps = cfg.epsilon_override
    else:
        eps = cfg.safety * limit
    if eps <= cfg.tol * max(g.diagonal(), 1.0):
        raise SolverError(f"epsilon {eps} underflows the tolerance; input too degenerate")
    return eps


def place_initial_sentinels(g: Pslg, circles, eps: float) -> List[SentinelPair]:
    """One mirrored pair per (vertex, incident edge), on the vertex's initial circle."""
    radii = _radius_array(g, circles)
    out = []
    for k, (a, b) in enumerate(g.edges):
        for v, w in ((a, b), (b, a)):
            rho = radii[v]
            if eps >= rho:
                raise SolverError(f"epsilon {eps} does not fit the initial circle of vertex {v}")
            P, Q = g.vertices[v], g.vertices[w]
            d = (Q - P) / np.hypot(*(Q - P))
            n = np.array([-d[1], d[0]])
            foot = P + math.sqrt(rho * rho - eps * eps) * d
            out.append(SentinelPair(Point(*(foot + eps * n)), Point(*(foot - eps * n)), k, Point(*foot), eps))
    return out


def _radius_array(g: Pslg, circles) -> np.ndarray:
    if isinstance(circles, dict):
        r = np.full(g.n_vertices, np.nan)
        for v, c in circles.items():
            r[v] = c.radius
        return r
    return np.asarray(circles, dtype=float)


# ---------------------------------------------------------------------------
# inner circles

def cover_edge_naive(w1: float, w2: float, eps: float):
    """Feet/offsets of the naive cover plus its circles (t, r, own pair).

    ``k = floor(delta / 2eps) + 1`` tangent circles of equal radius
    ``delta / 2k``, which lies in [eps/2, eps) once k >= 2. Equal radii keep
    every pair outside its neighbours' circles; a short final circle would
    not. A single circle (short gap) keeps the full radius and sits in the
    middle.
    """
    delta = w2 - w1
    if delta <= 0:
        return np.empty(0), np.empty(0), np.empty(0), np.empty(0)
    k = int(math.floor(delta / (2.0 * eps))) + 1
    if k == 1:
        t = np.array([w1 + delta / 2.0])
        r = np.array([eps])
    else:
        r = np.full(k, delta / (2.0 * k))
        t = w1 + (2.0 * np.arange(k) + 1.0) * r
    return t, r.copy(), t, r


def _quad_roots(a, b, c):
    """Real roots of a*t**2 + b*t + c (elementwise); NaN where absent."""
    a, b, c = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float), np.asarray(c, float))
    r1 = np.full(a.shape, np.nan)
    r2 = np.full(a.shape, np.nan)
    scale = np.maximum(np.maximum(abs(a), abs(b)), abs(c))
    lin = abs(a) <= 1e-13 * np.where(scale > 0, scale, 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        disc = b * b - 4 * a * c
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        q = -0.5 * (b + np.copysign(sq, b))
        quad = ~lin & (disc >= 0)
        r1 = np.where(quad, q / a, r1)
        r2 = np.where(quad & (q != 0), c / q, r2)
        r1 = np.where(lin & (b != 0), -c / b, r1)
    return r1, r2


def first_touch(eps: float, x0, y0, x1, y1) -> float:
    """Smallest center offset ``t > 0`` at which a circle through (0, +/-eps),
    centered at (t, 0), comes within ``eps`` of one of the segments.

    Coordinates are in the frame of the growing edge with the anchor foot at
    the origin. For each segment the touch is either with its supporting line
    (while the closest point is interior) or with one of its endpoints; both
    reduce to a quadratic in ``t``. Returns ``inf`` when nothing is touched.
    """
    best = math.inf
    if len(x0) == 0:
        return best
    e2 = eps * eps
    for px, py in ((x0, y0), (x1, y1)):
        # |c - P| = r + eps   ->  -2 t px + px^2 + py^2 - 2 eps^2 = 2 eps r
        al = -2.0 * px
        be = px * px + py * py - 2.0 * e2
        roots = _quad_roots(al * al - 4.0 * e2, 2.0 * al * be, be * be - 4.0 * e2 * e2)
        for t in roots:
            ok = (t > 0) & (al * t + be >= 0)
            if ok.any():
                best = min(best, float(t[ok].min()))
    dx, dy = x1 - x0, y1 - y0
    ln = np.hypot(dx, dy)
    nx, ny = -dy / ln, dx / ln
    c = -(nx * x0 + ny * y0)
    sig = np.sign(c)
    sig = np.where(sig == 0, np.where(nx >= 0, 1.0, -1.0), sig)
    # sig * (nx t + c) - eps = r
    al = sig * nx
    be = sig * c - eps
    roots = _quad_roots(al * al - 1.0, 2.0 * al * be, be * be - e2)
    for t in roots:
        with np.errstate(invalid="ignore"):
            u = ((t - x0) * dx - y0 * dy) / (ln * ln)
            ok = (t > 0) & (al * t + be >= 0) & (u >= 0) & (u <= 1)
        if ok.any():
            best = min(best, float(t[ok].min()))
    return best


def _clearance(t: float, eps: float, x0, y0, x1, y1) -> float:
    """dist(center, obstacles) - radius - eps for the circle at offset t."""
    if len(x0) == 0:
        return math.inf
    d = point_segment_distance(t, 0.0, x0, y0, x1, y1).min()
    return float(d) - math.sqrt(t * t + eps * eps) - eps


def _safe_touch(eps: float, x0, y0, x1, y1, limit: float) -> float:
    t = first_touch(eps, x0, y0, x1, y1)
    if t >= limit:
        return t
    t *= 1.0 - 1e-9
    if _clearance(t, eps, x0, y0, x1, y1) >= -1e-12 * max(1.0, t):
        return t
    # root finding missed an earlier contact; march conservatively instead
    t = 0.0
    for _ in range(10000):
        s = _clearance(t, eps, x0, y0, x1, y1)
        if s <= 1e-9 * eps or t >= limit:
            break
        t += s / 2.0
    return t


def cover_edge_sequential(w1: float, w2: float, eps: float, obstacles) -> Tuple[List[float], List[Tuple[float, float]]]:
    """Greedy sweep from ``w1`` to ``w2``; returns feet and circles (t, r).

    ``obstacles`` holds candidate segments in the edge frame as four arrays
    (x0, y0, x1, y1).
    """
    x0, y0, x1, y1 = obstacles
    feet = [w1]
    circles: List[Tuple[float, float]] = []
    a = w1
    while True:
        gap = w2 - a
        if gap <= 0:
            break
        if gap <= 2.0 * eps:
            circles.append((a + gap / 2.0, math.hypot(gap / 2.0, eps)))
            break
        t = _safe_touch(eps, x0 - a, y0, x1 - a, y1, gap / 2.0)
        if t >= gap / 2.0:
            circles.append((a + gap / 2.0, math.hypot(gap / 2.0, eps)))
            break
        # never advance less than the naive step
        t = max(t, eps)
        circles.append((a + t, math.hypot(t, eps)))
        a = a + 2.0 * t
        if a >= w2:
            break
        feet.append(a)
    feet.append(w2)
    return feet, circles


def cover_edge_recursive(w1: float, w2: float, eps: float, obstacles) -> Tuple[List[float], List[Tuple[float, float]]]:
    """Midpoint-first cover of the gap ``[w1, w2]``; returns feet and circles."""
    x0, y0, x1, y1 = obstacles
    feet = {w1, w2}
    circles: List[Tuple[float, float]] = []
    stack = [(w1, w2)]
    min_r = math.sqrt(2.0) * eps
    while stack:
        a, b = stack.pop()
        gap = b - a
        if gap <= 0:
            continue
        m = a + gap / 2.0
        r_close = math.hypot(gap / 2.0, eps)
        if len(x0):
            room = float(point_segment_distance(m, 0.0, x0, y0, x1, y1).min()) - eps
        else:
            room = math.inf
        if gap <= 2.0 * eps or r_close <= room:
            circles.append((m, r_close))
            continue
        r = max(room, min_r)
        h = math.sqrt(r * r - eps * eps)
        circles.append((m, r))
        feet.update((m - h, m + h))
        stack.append((m + h, b))
        stack.append((a, m - h))
    return sorted(feet), sorted(circles)


# ---------------------------------------------------------------------------
# driver

def edge_ends(g: Pslg) -> Tuple[np.ndarray, np.ndarray]:
    """Start and end vertex of every edge; sweeps run from start to end."""
    return g.ends[:, 0], g.ends[:, 1]


def _edge_frames(g: Pslg):
    u, v = edge_ends(g)
    P = g.vertices[u]
    Q = g.vertices[v]
    L = g.lengths
    d = (Q - P) / L[:, None]
    return P, d, L


def _obstacle_candidates(g: Pslg, lo_t: np.ndarray, hi_t: np.ndarray, reach: np.ndarray) -> List[np.ndarray]:
    P, d, _ = _edge_frames(g)
    a = P + lo_t[:, None] * d
    b = P + hi_t[:, None] * d
    segs = shapely.linestrings(np.stack([a, b], axis=1))
    ii, jj = g.tree.query(segs, predicate="dwithin", distance=reach)
    keep = ii != jj
    ii, jj = ii[keep], jj[keep]
    order = np.lexsort((jj, ii))
    ii, jj = ii[order], jj[order]
    bounds = np.searchsorted(ii, np.arange(g.n_edges + 1))
    return [jj[bounds[k]:bounds[k + 1]] for k in range(g.n_edges)]


def _local(g: Pslg, k: int, cand: np.ndarray, P, d):
    n = np.array([-d[k, 1], d[k, 0]])
    A = g.vertices[g.ends[cand, 0]] - P[k]
    B = g.vertices[g.ends[cand, 1]] - P[k]
    return (A @ d[k], A @ n, B @ d[k], B @ n)


def solve(g: Pslg, cfg: SolverConfig = SolverConfig()) -> Solution:
    if g.n_edges == 0:
        raise SolverError("graph has no edges")
    if np.any(g.degree == 0):
        raise SolverError(f"vertex {int(np.argmin(g.degree))} is isolated")
    alpha = smallest_angle(g)
    clearance = vertex_clearance(g)
    radii = _initial_radii(g, cfg.safety, alpha, clearance)
    rho0 = float(radii.min())
    d_feat = float(clearance.min())
    eps = choose_epsilon(g, radii, cfg, alpha=alpha, d_feat=d_feat)

    P, d, L = _edge_frames(g)
    eu, ev = edge_ends(g)
    ru = radii[eu]
    rv = radii[ev]
    w1 = np.sqrt(ru * ru - eps * eps)
    w2 = L - np.sqrt(rv * rv - eps * eps)

    if cfg.variant != "naive":
        reach = (w2 - w1) / 2.0 + 2.0 * eps + 1e-9 * g.diagonal()
        cands = _obstacle_candidates(g, w1 - eps, w2 + eps, reach)

    plans: List[EdgeCoverPlan] = []
    for k in range(g.n_edges):
        a, b = float(w1[k]), float(w2[k])
        if cfg.variant == "naive":
            ct, cr, ft, fo = cover_edge_naive(a, b, eps)
            pair_t = np.concatenate([[a], ft, [b]])
            pair_off = np.concatenate([[eps], fo, [eps]])
            circ_pairs = np.column_stack([np.arange(1, len(ct) + 1), np.full(len(ct), -1)])
        else:
            obstacles = _local(g, k, cands[k], P, d)
            fn = cover_edge_sequential if cfg.variant == "sequential" else cover_edge_recursive
            feet, circs = fn(a, b, eps, obstacles)
            pair_t = np.asarray(feet, dtype=float)
            pair_off = np.full(len(pair_t), eps)
            ct = np.array([c[0] for c in circs], dtype=float)
            cr = np.array([c[1] for c in circs], dtype=float)
            # adjacent circles meet at the shared foot: circle i spans pairs i, i+1
            circ_pairs = np.column_stack([np.arange(len(ct)), np.arange(1, len(ct) + 1)])
        plans.append(EdgeCoverPlan(
            edge=k, u=int(eu[k]), v=int(ev[k]), origin=P[k], direction=d[k],
            length=float(L[k]), rho_u=float(ru[k]), rho_v=float(rv[k]),
            pair_t=pair_t, pair_off=pair_off, circ_t=ct, circ_r=cr, circ_pairs=circ_pairs.astype(np.int64),
        ))
    report = SolveReport(cfg.variant, alpha, rho0, eps, cfg.safety, cfg.tol, radii, plans, d_feat)
    return Solution(collect_sites(plans), report)


def collect_sites(plans: List[EdgeCoverPlan]) -> np.ndarray:
    if not plans:
        return np.empty((0, 2))
    pts = []
    for p in plans:
        a, b = p.pair_points()
        pts.append(a)
        pts.append(b)
    S = np.concatenate(pts)
    order = np.lexsort((S[:, 1], S[:, 0]))
    S = S[order]
    if len(S) > 1:
        same = np.all(S[1:] == S[:-1], axis=1)
        S = S[np.concatenate([[True], ~same])]
    return S


# ---------------------------------------------------------------------------
# solution files

def save_solution(sol: Solution, path) -> None:
    Path(path).write_text(json.dumps(sol.to_dict()) + "\n")


def solution_from_dict(g: Pslg, doc: Dict) -> Solution:
    try:
        sites = np.asarray(doc["sites"], dtype=float).reshape(-1, 2)
        rep = doc["report"]
        P, d, L = _edge_frames(g)
        eu, ev = edge_ends(g)
        plans = []
        raw = rep.get("plans", [])
        if len(raw) != g.n_edges:
            raise SolverError(f"solution describes {len(raw)} edges, graph has {g.n_edges}")
        for item in raw:
            k = int(item["edge"])
            pairs = np.asarray(item["pairs"], dtype=float).reshape(-1, 2)
            circ = np.asarray(item["circles"], dtype=float).reshape(-1, 4)
            plans.append(EdgeCoverPlan(
                edge=k, u=int(eu[k]), v=int(ev[k]), origin=P[k], direction=d[k],
                length=float(L[k]), rho_u=float(item["rho"][0]), rho_v=float(item["rho"][1]),
                pair_t=pairs[:, 0].copy(), pair_off=pairs[:, 1].copy(),
                circ_t=circ[:, 0].copy(), circ_r=circ[:, 1].copy(), circ_pairs=circ[:, 2:].astype(np.int64),
            ))
        radii = np.full(g.n_vertices, np.nan)
        for p in plans:
            radii[p.u], radii[p.v] = p.rho_u, p.rho_v
        report = SolveReport(rep["variant"], float(rep["alpha"]), float(rep["rho0"]), float(rep["epsilon"]),
                             float(rep.get("safety", 0.995)), float(rep.get("tol", 1e-9)), radii, plans)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        if isinstance(exc, SolverError):
            raise
        raise SolverError(f"malformed solution: {exc}") from None
    return Solution(sites, report)


def load_solution(g: Pslg, path) -> Solution:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SolverError(f"malformed JSON in {path}: {exc}") from None
    return solution_from_dict(g, doc)
