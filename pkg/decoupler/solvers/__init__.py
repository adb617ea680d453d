"""
Eigensolver backends.

Usage:
    from decoupler.solvers import get_solver

    solver = get_solver("auto", dim=H.dim)
    values, vectors = solver.solve(H.matrix, k=40)
"""

from .base import EigenSolver
from .dense import DenseEigenSolver
from .factory import SOLVERS, get_solver
from .sparse import SparseEigenSolver

__all__ = [
    "EigenSolver",
    "DenseEigenSolver",
    "SparseEigenSolver",
    "SOLVERS",
    "get_solver",
]
