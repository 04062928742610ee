"""Voronoi sites whose diagram contains every edge of a planar straight-line graph."""

from .pslg import Pslg, PslgError, build_pslg, load, metrics, save, validate
from .solver import Solution, SolverConfig, SolverError, solve

__all__ = [
    "Pslg", "PslgError", "build_pslg", "load", "metrics", "save", "validate",
    "Solution", "SolverConfig", "SolverError", "solve",
]
__version__ = "0.1.0"
