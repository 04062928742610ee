"""Doubly-connected edge list for the input tesselation.

Half-edge ``2k`` runs ``edges[k, 0] -> edges[k, 1]`` and ``2k + 1`` is its
twin. Faces lie to the left of their half-edges; a face cycle with positive
signed area is a bounded region.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import shapely
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .geom import point_segment_distance


class PslgError(ValueError):
    """Invalid planar straight-line graph input."""


@dataclass(frozen=True)
class Face:
    half_edge: int
    bounded: bool
    area: float


@dataclass(frozen=True, eq=False)
class Pslg:
    vertices: np.ndarray
    edges: np.ndarray
    origin: np.ndarray
    twin: np.ndarray
    next: np.ndarray
    prev: np.ndarray
    face: np.ndarray
    faces: Tuple[Face, ...]

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_regions(self) -> int:
        return sum(1 for f in self.faces if f.bounded)

    @cached_property
    def ends(self) -> np.ndarray:
        """Edge endpoints ordered by coordinates (x, then y) instead of by label,
        so geometric computations do not depend on the vertex numbering."""
        a, b = self.edges[:, 0], self.edges[:, 1]
        Va, Vb = self.vertices[a], self.vertices[b]
        swap = (Vb[:, 0] < Va[:, 0]) | ((Vb[:, 0] == Va[:, 0]) & (Vb[:, 1] < Va[:, 1]))
        out = np.column_stack([np.where(swap, b, a), np.where(swap, a, b)])
        out.setflags(write=False)
        return out

    @cached_property
    def lengths(self) -> np.ndarray:
        a = self.vertices[self.ends[:, 0]]
        b = self.vertices[self.ends[:, 1]]
        return np.hypot(*(b - a).T)

    @cached_property
    def degree(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    @cached_property
    def outgoing(self) -> List[List[int]]:
        """Outgoing half-edges of each vertex in counter-clockwise order."""
        return _sorted_outgoing(self.vertices, self.edges)

    @cached_property
    def tree(self) -> shapely.STRtree:
        return shapely.STRtree(self.segments_geoms)

    @cached_property
    def segments_geoms(self) -> np.ndarray:
        coords = np.stack([self.vertices[self.ends[:, 0]], self.vertices[self.ends[:, 1]]], axis=1)
        return shapely.linestrings(coords)

    def bbox(self) -> Tuple[float, float, float, float]:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    def diagonal(self) -> float:
        x0, y0, x1, y1 = self.bbox()
        return math.hypot(x1 - x0, y1 - y0)

    def n_components(self) -> int:
        return _components(self.n_vertices, self.edges)[0]


@dataclass
class PslgMetrics:
    alpha: float
    lambda_per_vertex: np.ndarray
    delta_max: float
    bbox: Tuple[float, float, float, float]


# ---------------------------------------------------------------------------
# construction

def _sorted_outgoing(vertices: np.ndarray, edges: np.ndarray) -> List[List[int]]:
    n = len(vertices)
    out: List[List[int]] = [[] for _ in range(n)]
    if len(edges) == 0:
        return out
    he_origin = np.empty(2 * len(edges), dtype=np.int64)
    he_origin[0::2] = edges[:, 0]
    he_origin[1::2] = edges[:, 1]
    he_dest = np.empty_like(he_origin)
    he_dest[0::2] = edges[:, 1]
    he_dest[1::2] = edges[:, 0]
    d = vertices[he_dest] - vertices[he_origin]
    ang = np.arctan2(d[:, 1], d[:, 0])
    order = np.lexsort((ang, he_origin))
    for h in order:
        out[he_origin[h]].append(int(h))
    return out


def _components(n: int, edges: np.ndarray) -> Tuple[int, np.ndarray]:
    if len(edges) == 0:
        return n, np.arange(n)
    m = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    return connected_components(m, directed=False)


def find_crossings(vertices: np.ndarray, edges: np.ndarray, limit: int = 1) -> List[Tuple[int, int]]:
    """Pairs of edges that meet anywhere other than at a shared endpoint."""
    if len(edges) < 2:
        return []
    coords = np.stack([vertices[edges[:, 0]], vertices[edges[:, 1]]], axis=1)
    geoms = shapely.linestrings(coords)
    tree = shapely.STRtree(geoms)
    i, j = tree.query(geoms, predicate="intersects")
    keep = i < j
    i, j = i[keep], j[keep]
    bad: List[Tuple[int, int]] = []
    for a, b in zip(i.tolist(), j.tolist()):
        shared = set(edges[a].tolist()) & set(edges[b].tolist())
        if not shared:
            bad.append((a, b))
        else:
            # adjacent edges may only touch at the shared vertex
            inter = shapely.intersection(geoms[a], geoms[b])
            if inter.geom_type != "Point":
                bad.append((a, b))
        if len(bad) >= limit:
            break
    return bad


def build_pslg(vertices, edges, check: bool = True) -> Pslg:
    V = np.array(vertices, dtype=float).reshape(-1, 2)
    E = np.array(edges, dtype=np.int64).reshape(-1, 2)
    if not np.all(np.isfinite(V)):
        raise PslgError("non-finite vertex coordinate")
    n = len(V)
    if len(E):
        if E.min() < 0 or E.max() >= n:
            k = int(np.nonzero((E < 0).any(axis=1) | (E >= n).any(axis=1))[0][0])
            raise PslgError(f"edge {k} {E[k].tolist()} references a vertex out of range")
        loops = np.nonzero(E[:, 0] == E[:, 1])[0]
        if len(loops):
            raise PslgError(f"edge {int(loops[0])} is a self-loop")
        E = np.sort(E, axis=1)
        E = E[np.lexsort((E[:, 1], E[:, 0]))]
        dup = np.nonzero((np.diff(E, axis=0) == 0).all(axis=1))[0]
        if len(dup):
            raise PslgError(f"duplicate edge {E[dup[0]].tolist()}")
    if check:
        if n > 1:
            diag = float(np.hypot(*(V.max(axis=0) - V.min(axis=0))))
            pairs = cKDTree(V).query_pairs(1e-9 * diag) if diag > 0 else {(0, 1)}
            if pairs:
                a, b = min(pairs)
                raise PslgError(f"duplicate vertices {a} and {b}")
        cross = find_crossings(V, E)
        if cross:
            a, b = cross[0]
            raise PslgError(f"edges {E[a].tolist()} and {E[b].tolist()} cross")
    return _assemble(V, E)


def _assemble(V: np.ndarray, E: np.ndarray) -> Pslg:
    m = len(E)
    origin = np.empty(2 * m, dtype=np.int64)
    origin[0::2] = E[:, 0]
    origin[1::2] = E[:, 1]
    twin = np.arange(2 * m) ^ 1
    outgoing = _sorted_outgoing(V, E)
    pos = np.empty(2 * m, dtype=np.int64)
    for lst in outgoing:
        for k, h in enumerate(lst):
            pos[h] = k
    nxt = np.empty(2 * m, dtype=np.int64)
    for h in range(2 * m):
        t = twin[h]
        around = outgoing[origin[t]]
        nxt[h] = around[(pos[t] - 1) % len(around)]
    prv = np.empty_like(nxt)
    prv[nxt] = np.arange(2 * m)
    face = np.full(2 * m, -1, dtype=np.int64)
    faces: List[Face] = []
    for h0 in range(2 * m):
        if face[h0] >= 0:
            continue
        area = 0.0
        h = h0
        while face[h] < 0:
            face[h] = len(faces)
            a = V[origin[h]]
            b = V[origin[twin[h]]]
            area += a[0] * b[1] - a[1] * b[0]
            h = nxt[h]
        area *= 0.5
        faces.append(Face(h0, area > 0, area))
    for arr in (V, E, origin, twin, nxt, prv, face):
        arr.setflags(write=False)
    return Pslg(V, E, origin, twin, nxt, prv, face, tuple(faces))


# ---------------------------------------------------------------------------
# validation and metrics

def validate(g: Pslg, convexity: bool = True) -> List[str]:
    """Human-readable list of violated invariants; empty means valid."""
    problems: List[str] = []
    h = np.arange(len(g.twin))
    if len(h):
        if np.any(g.twin == h) or np.any(g.twin[g.twin] != h):
            problems.append("twin involution violated")
        if np.any(g.next[g.prev] != h) or np.any(g.prev[g.next] != h):
            problems.append("next/prev are not inverse")
        if np.any(g.face < 0) or np.any(g.face[g.next] != g.face):
            problems.append("face cycles do not partition the half-edges")
    if np.any(g.lengths <= 0):
        problems.append("zero-length edge")
    if g.n_vertices > 1:
        diag = g.diagonal()
        if cKDTree(g.vertices).query_pairs(1e-9 * diag):
            problems.append("duplicate vertices")
    cross = find_crossings(g.vertices, g.edges)
    if cross:
        a, b = cross[0]
        problems.append(f"edges {a} and {b} intersect")
    for v, lst in enumerate(g.outgoing):
        if len(lst) < 2:
            continue
        d = g.vertices[g.origin[g.twin[lst]]] - g.vertices[v]
        ang = np.arctan2(d[:, 1], d[:, 0])
        if np.any(np.diff(ang) <= 0):
            problems.append(f"angular order at vertex {v} is not strictly increasing")
            break
    ncomp = g.n_components()
    faces = g.n_regions + 1
    if g.n_vertices - g.n_edges + faces != 1 + ncomp:
        problems.append(f"Euler relation fails: V={g.n_vertices} E={g.n_edges} F={faces} C={ncomp}")
    if convexity:
        reflex = reflex_vertices(g)
        if reflex:
            problems.append(f"convexity audit: {len(reflex)} reflex corner(s) in bounded faces (report only)")
    return problems


def is_valid(report: Sequence[str]) -> bool:
    return all(msg.startswith("convexity audit") for msg in report)


def reflex_vertices(g: Pslg) -> List[Tuple[int, int]]:
    """(face id, vertex id) for every reflex corner of a bounded face."""
    out = []
    for fid, f in enumerate(g.faces):
        if not f.bounded:
            continue
        h = f.half_edge
        while True:
            n = g.next[h]
            a = g.vertices[g.origin[h]]
            b = g.vertices[g.origin[n]]
            c = g.vertices[g.origin[g.next[n]]]
            cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            if cross < 0:
                out.append((fid, int(g.origin[n])))
            h = n
            if h == f.half_edge:
                break
    return out


def metrics(g: Pslg) -> PslgMetrics:
    alpha = math.inf
    for v, lst in enumerate(g.outgoing):
        if len(lst) < 2:
            continue
        d = g.vertices[g.origin[g.twin[lst]]] - g.vertices[v]
        ang = np.arctan2(d[:, 1], d[:, 0])
        gaps = np.diff(np.append(ang, ang[0] + 2 * math.pi))
        alpha = min(alpha, float(gaps.min()))
    if not math.isfinite(alpha):
        raise PslgError("smallest angle undefined: no vertex has degree >= 2")
    return PslgMetrics(min(alpha, math.pi), metrics_lambda(g), float(g.lengths.max()), g.bbox())


def vertex_clearance(g: Pslg) -> np.ndarray:
    """Distance from every vertex to the nearest edge not incident to it."""
    n = g.n_vertices
    out = np.full(n, math.inf)
    if g.n_edges == 0:
        return out
    pts = shapely.points(g.vertices)
    lam = metrics_lambda(g)
    radius = np.where(np.isfinite(lam), lam, g.diagonal())
    pending = np.arange(n)
    V, E = g.vertices, g.ends
    while len(pending):
        vi, ei = g.tree.query(pts[pending], predicate="dwithin", distance=radius[pending])
        vi = pending[vi]
        keep = (E[ei, 0] != vi) & (E[ei, 1] != vi)
        vi, ei = vi[keep], ei[keep]
        if len(vi):
            d = point_segment_distance(V[vi, 0], V[vi, 1], V[E[ei, 0], 0], V[E[ei, 0], 1], V[E[ei, 1], 0], V[E[ei, 1], 1])
            np.minimum.at(out, vi, d)
        found = np.isfinite(out[pending])
        exhausted = radius[pending] > 2 * g.diagonal()
        pending = pending[~found & ~exhausted]
        radius[pending] *= 4
    return out


def metrics_lambda(g: Pslg) -> np.ndarray:
    lam = np.full(g.n_vertices, math.inf)
    if g.n_edges:
        np.minimum.at(lam, g.edges[:, 0], g.lengths)
        np.minimum.at(lam, g.edges[:, 1], g.lengths)
    return lam


# ---------------------------------------------------------------------------
# file format

def to_dict(g: Pslg) -> Dict:
    return {
        "vertices": [[float(x), float(y)] for x, y in g.vertices],
        "edges": [[int(i), int(j)] for i, j in g.edges],
    }


def save(g: Pslg, path, header: Optional[Dict] = None) -> None:
    doc = {}
    if header is not None:
        doc["gen"] = header
    doc.update(to_dict(g))
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def from_dict(doc: Dict) -> Pslg:
    if not isinstance(doc, dict) or "vertices" not in doc or "edges" not in doc:
        raise PslgError("expected an object with 'vertices' and 'edges'")
    verts = doc["vertices"]
    for k, v in enumerate(verts):
        if not (isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(c, (int, float)) for c in v)):
            raise PslgError(f"vertex record {k} is not an [x, y] pair")
    for k, e in enumerate(doc["edges"]):
        if not (isinstance(e, (list, tuple)) and len(e) == 2 and all(isinstance(c, int) for c in e)):
            raise PslgError(f"edge record {k} is not an [i, j] index pair")
        if not (0 <= e[0] < len(verts) and 0 <= e[1] < len(verts)):
            raise PslgError(f"edge record {k} {list(e)} references a vertex out of range")
    return build_pslg(verts, doc["edges"])


def load(path) -> Pslg:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise PslgError(f"malformed JSON in {path}: {exc}") from None
    return from_dict(doc)
