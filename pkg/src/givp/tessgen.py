"""Random tesselations: uniform points joined by random segments.

Points are drawn uniformly in a box, then random pairs of them are joined.
A new segment that crosses existing edges splits both at the crossing,
which becomes a vertex. Afterwards components are linked and degree-1
vertices receive a second edge, so every vertex ends with degree >= 2.

Draws that would produce a degenerate or badly conditioned graph (shared
lines, crossings too close to a vertex, slivers of angle) are rejected and
count as a spent attempt; the thresholds are part of the configuration.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.sparse import coo_matrix
from scipy.spatial import cKDTree

from .pslg import Pslg, build_pslg

RNG_ID = "numpy.PCG64"


class TessGenError(ValueError):
    """Invalid generator configuration."""


@dataclass(frozen=True)
class TessGenConfig:
    seed: int
    n_points: int
    n_edge_attempts: int
    box: Tuple[float, float, float, float] = (0.0, 0.0, 1000.0, 1000.0)
    # rejection thresholds; lengths are fractions of the box diagonal
    min_angle_deg: float = 10.0
    min_length: float = 0.004
    min_clearance: float = 0.002
    # draws per attempt before the attempt is given up
    max_draws: int = 50

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= int(self.seed) < 2 ** 64:
            raise TessGenError("seed must be an integer in [0, 2**64)")
        if self.n_points < 2:
            raise TessGenError(f"n_points must be at least 2, got {self.n_points}")
        if self.n_edge_attempts < 0:
            raise TessGenError("n_edge_attempts must be non-negative")
        x0, y0, x1, y1 = self.box
        if not (x1 > x0 and y1 > y0):
            raise TessGenError("box must have positive width and height")
        if not 0.0 <= self.min_angle_deg < 60.0:
            raise TessGenError("min_angle_deg must be in [0, 60)")
        if self.min_length < 0 or self.min_clearance < 0:
            raise TessGenError("thresholds must be non-negative")
        if self.max_draws < 1:
            raise TessGenError("max_draws must be at least 1")

    def header(self) -> Dict:
        d = asdict(self)
        d["box"] = list(self.box)
        d["rng_id"] = RNG_ID
        return d


@dataclass
class _Guards:
    sin_angle: float
    length: float
    clearance: float

    def scaled(self, f: float) -> "_Guards":
        return _Guards(self.sin_angle * f, self.length * f, self.clearance * f)

    def relaxed(self, diag: float) -> "_Guards":
        return _Guards(0.0, 1e-7 * diag, 1e-7 * diag)


class _Builder:
    """Mutable vertex/edge arrays with guarded segment insertion."""

    def __init__(self, pts: np.ndarray):
        self.V: List[Tuple[float, float]] = [tuple(map(float, p)) for p in pts]
        self.E: List[Tuple[int, int]] = []
        self.edge_set = set()
        self._va = np.asarray(self.V, dtype=float)
        self._ea = np.empty((0, 2), dtype=np.int64)
        self.adj: List[List[int]] = [[] for _ in self.V]

    # cached numpy views, refreshed after every mutation
    def _sync(self):
        self._va = np.asarray(self.V, dtype=float)
        self._ea = np.asarray(self.E, dtype=np.int64).reshape(-1, 2)

    def _add_edge(self, i: int, j: int):
        key = (min(i, j), max(i, j))
        self.E.append(key)
        self.edge_set.add(key)
        self.adj[i].append(j)
        self.adj[j].append(i)

    def _remove_edge(self, k: int):
        i, j = self.E[k]
        self.edge_set.discard((i, j))
        self.adj[i].remove(j)
        self.adj[j].remove(i)

    def _angle_ok(self, v: int, d: np.ndarray, guards: _Guards) -> bool:
        """New direction ``d`` (unit) at vertex ``v`` keeps the angle guard."""
        P = self._va[v]
        for w in self.adj[v]:
            e = self._va[w] - P
            e = e / math.hypot(e[0], e[1])
            cross = d[0] * e[1] - d[1] * e[0]
            dot = d[0] * e[0] + d[1] * e[1]
            if dot > 0 and abs(cross) < guards.sin_angle:
                return False
            if dot > 0 and abs(cross) <= 1e-12:
                return False
        return True

    def plan(self, a: int, b: int, guards: _Guards, allow_cross: bool = True):
        """Crossings of segment ``a``-``b`` with current edges, or None if rejected."""
        if a == b or (min(a, b), max(a, b)) in self.edge_set:
            return None
        V, E = self._va, self._ea
        A, B = V[a], V[b]
        L = math.hypot(*(B - A))
        if L < guards.length:
            return None
        d = (B - A) / L
        if not (self._angle_ok(a, d, guards) and self._angle_ok(b, -d, guards)):
            return None
        # vertices near the open segment
        rel = V - A
        t = rel @ d
        off = rel @ np.array([-d[1], d[0]])
        near = np.hypot(np.where(t < 0, t, np.where(t > L, t - L, 0.0)), off) < max(guards.clearance, 1e-12 * L)
        near[[a, b]] = False
        if near.any():
            return None
        if len(E) == 0:
            return []
        C, D = V[E[:, 0]], V[E[:, 1]]
        r = D - C
        denom = d[0] * r[:, 1] - d[1] * r[:, 0]
        q = C - A
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (q[:, 0] * r[:, 1] - q[:, 1] * r[:, 0]) / denom
            u = (q[:, 0] * d[1] - q[:, 1] * d[0]) / denom
        shares = (E[:, 0] == a) | (E[:, 1] == a) | (E[:, 0] == b) | (E[:, 1] == b)
        rlen = np.hypot(r[:, 0], r[:, 1])
        sin_x = np.abs(denom) / rlen
        # parallel edges on the same line that overlap the new segment
        par = sin_x <= 1e-12
        if par.any():
            offp = np.abs(q[par] @ np.array([-d[1], d[0]]))
            tc = q[par] @ d
            td = (D[par] - A) @ d
            lo, hi = np.minimum(tc, td), np.maximum(tc, td)
            if np.any((offp <= 1e-9 * L) & (hi > 0) & (lo < L)):
                return None
        hit = ~par & ~shares & (s >= 0) & (s <= L) & (u >= 0) & (u <= 1)
        ks = np.nonzero(hit)[0]
        if len(ks) and not allow_cross:
            return None
        if len(ks) == 0:
            return []
        if np.any(sin_x[ks] < max(guards.sin_angle, 1e-9)):
            return None
        sk, uk = s[ks], u[ks]
        # crossing points must stay clear of the vertices of both segments
        if np.any(np.minimum(uk, 1 - uk) * rlen[ks] < guards.length):
            return None
        order = np.argsort(sk, kind="stable")
        ks, sk, uk = ks[order], sk[order], uk[order]
        pieces = np.diff(np.concatenate([[0.0], sk, [L]]))
        if np.any(pieces < guards.length):
            return None
        X = A + sk[:, None] * d
        if guards.clearance > 0:
            # crossing points against every other edge
            for x, k in zip(X, ks):
                dist = _seg_dist(x, C, D)
                dist[k] = np.inf
                dist[hit] = np.inf
                if dist.min() < guards.clearance:
                    return None
        return list(zip(ks.tolist(), X.tolist()))

    def insert(self, a: int, b: int, crossings) -> None:
        chain = [a]
        removed = []
        for k, x in crossings:
            c, dd = self.E[k]
            self.V.append((float(x[0]), float(x[1])))
            self.adj.append([])
            xv = len(self.V) - 1
            removed.append(k)
            self._remove_edge(k)
            self._add_edge(c, xv)
            self._add_edge(xv, dd)
            chain.append(xv)
        chain.append(b)
        for i, j in zip(chain[:-1], chain[1:]):
            self._add_edge(i, j)
        if removed:
            drop = set(removed)
            self.E = [e for k, e in enumerate(self.E) if k not in drop]
        self._sync()


def _seg_dist(p, C, D) -> np.ndarray:
    r = D - C
    den = (r * r).sum(axis=1)
    t = np.clip(((p - C) * r).sum(axis=1) / den, 0.0, 1.0)
    proj = C + t[:, None] * r
    return np.hypot(*(p - proj).T)


def _components(n: int, E: List[Tuple[int, int]]) -> np.ndarray:
    if not E:
        return np.arange(n)
    e = np.asarray(E)
    m = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    return connected_components(m, directed=False)[1]


def _try_link(b: _Builder, sources: np.ndarray, targets: np.ndarray, guards: List[_Guards], k: int = 24) -> bool:
    """Add the shortest admissible segment from ``sources`` to ``targets``.

    Candidates are tried nearest first: first without crossings under each
    guard set in turn, then with crossings allowed.
    """
    if len(targets) == 0 or len(sources) == 0:
        return False
    tree = cKDTree(b._va[targets])
    kk = min(k, len(targets))
    dist, idx = tree.query(b._va[sources], k=kk)
    dist = np.asarray(dist).reshape(len(sources), kk)
    idx = np.asarray(idx).reshape(len(sources), kk)
    cand = sorted(
        (float(dist[i, j]), int(sources[i]), int(targets[idx[i, j]]))
        for i in range(len(sources)) for j in range(kk)
    )
    for allow in (False, True):
        for gset in guards:
            for _, u, v in cand:
                plan = b.plan(u, v, gset, allow_cross=allow)
                if plan is not None:
                    b.insert(u, v, plan)
                    return True
    return False


def generate(cfg: TessGenConfig) -> Pslg:
    return generate_with_header(cfg)[0]


def generate_with_header(cfg: TessGenConfig) -> Tuple[Pslg, Dict]:
    rng = np.random.Generator(np.random.PCG64(int(cfg.seed)))
    x0, y0, x1, y1 = cfg.box
    diag = math.hypot(x1 - x0, y1 - y0)
    pts = np.column_stack([rng.uniform(x0, x1, cfg.n_points), rng.uniform(y0, y1, cfg.n_points)])
    b = _Builder(pts)
    guards = _Guards(math.sin(math.radians(cfg.min_angle_deg)), cfg.min_length * diag, cfg.min_clearance * diag)
    fallback = [guards, guards.scaled(0.5), guards.scaled(0.25), guards.relaxed(diag)]

    accepted = 0
    for _ in range(cfg.n_edge_attempts):
        for _ in range(cfg.max_draws):
            i, j = rng.choice(cfg.n_points, size=2, replace=False)
            plan = b.plan(int(i), int(j), guards)
            if plan is not None:
                b.insert(int(i), int(j), plan)
                accepted += 1
                break

    # link components, smallest-labelled stray component first
    while True:
        comp = _components(len(b.V), b.E)
        if comp.max(initial=0) == 0:
            break
        main = comp[0]
        stray = min(c for c in np.unique(comp) if c != main)
        src = np.nonzero(comp == stray)[0]
        dst = np.nonzero(comp != stray)[0]
        if not _try_link(b, src, dst, fallback, k=min(64, len(dst))):
            raise RuntimeError("could not connect components")  # pragma: no cover

    # second edge for every dangling vertex
    while True:
        deg = np.bincount(np.asarray(b.E).ravel(), minlength=len(b.V))
        loose = np.nonzero(deg < 2)[0]
        if len(loose) == 0:
            break
        v = int(loose[0])
        others = np.array([w for w in range(len(b.V)) if w != v and w not in b.adj[v]])
        if not _try_link(b, np.array([v]), others, fallback, k=min(64, len(others))):
            raise RuntimeError(f"could not attach vertex {v}")  # pragma: no cover

    g = build_pslg(b._va, b._ea)
    header = cfg.header()
    header["accepted_edges"] = accepted
    return g, header
