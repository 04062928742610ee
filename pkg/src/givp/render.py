"""Deterministic layered SVG of a graph, its sentinel circles and sites."""

from __future__ import annotations

import math
from typing import List, Optional

import numpy as np

from .pslg import Pslg
from .solver import Solution
from .verify import VoronoiDiagram


def _f(v: float) -> str:
    s = f"{v:.6f}"
    return "0.000000" if s == "-0.000000" else s


class _Canvas:
    def __init__(self, g: Pslg, width: float = 800.0, sites: Optional[np.ndarray] = None):
        x0, y0, x1, y1 = g.bbox()
        if sites is not None and len(sites):
            x0, y0 = min(x0, float(sites[:, 0].min())), min(y0, float(sites[:, 1].min()))
            x1, y1 = max(x1, float(sites[:, 0].max())), max(y1, float(sites[:, 1].max()))
        span = max(x1 - x0, y1 - y0, 1e-12)
        self.pad = 0.05 * span
        self.x0, self.y1 = x0 - self.pad, y1 + self.pad
        self.scale = width / (span + 2 * self.pad)
        self.w = (x1 - x0 + 2 * self.pad) * self.scale
        self.h = (y1 - y0 + 2 * self.pad) * self.scale

    def xy(self, p) -> str:
        return f'{_f((p[0] - self.x0) * self.scale)} {_f((self.y1 - p[1]) * self.scale)}'

    def x(self, v: float) -> str:
        return _f((v - self.x0) * self.scale)

    def y(self, v: float) -> str:
        return _f((self.y1 - v) * self.scale)

    def r(self, v: float) -> str:
        return _f(v * self.scale)


def render_svg(g: Pslg, sol: Optional[Solution] = None, diagram: Optional[VoronoiDiagram] = None,
               width: float = 800.0) -> str:
    c = _Canvas(g, width, sol.sites if sol is not None else None)
    out: List[str] = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(c.w)}" height="{_f(c.h)}" '
        f'viewBox="0 0 {_f(c.w)} {_f(c.h)}">',
    ]
    if diagram is not None:
        segs, _ = diagram.edge_list()
        if len(segs):
            out.append('<g id="voronoi" stroke="#9db4d6" stroke-width="0.5" fill="none">')
            for a, b in segs:
                out.append(f'<path d="M {c.xy(a)} L {c.xy(b)}"/>')
            out.append("</g>")
    out.append('<g id="edges" stroke="#000000" stroke-width="2" stroke-linecap="round">')
    for i, j in g.edges:
        a, b = g.vertices[i], g.vertices[j]
        out.append(f'<line x1="{c.x(a[0])}" y1="{c.y(a[1])}" x2="{c.x(b[0])}" y2="{c.y(b[1])}"/>')
    out.append("</g>")
    if sol is not None and len(sol.sites):
        rho = sol.report.rho
        init = [(v, float(rho[v])) for v in range(g.n_vertices) if v < len(rho) and np.isfinite(rho[v])]
        if init:
            out.append('<g id="initial-circles" stroke="#2a9d4b" stroke-width="0.75" fill="none">')
            for v, r in init:
                p = g.vertices[v]
                out.append(f'<circle cx="{c.x(p[0])}" cy="{c.y(p[1])}" r="{c.r(r)}"/>')
            out.append("</g>")
        inner = [circ for plan in sol.report.plans for circ in plan.circles]
        if inner:
            out.append('<g id="inner-circles" stroke="#e07b00" stroke-width="0.75" fill="none">')
            for circ in inner:
                ctr = circ.circle.center
                out.append(f'<circle cx="{c.x(ctr[0])}" cy="{c.y(ctr[1])}" r="{c.r(circ.circle.radius)}"/>')
            out.append("</g>")
        dot = max(1.0, 0.003 * c.w)
        out.append(f'<g id="sites" fill="#c0392b">')
        for s in sol.sites:
            out.append(f'<circle cx="{c.x(s[0])}" cy="{c.y(s[1])}" r="{_f(dot)}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
