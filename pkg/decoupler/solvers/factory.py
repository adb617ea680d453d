"""
Eigensolver factory - Picks a backend by name or by problem size
"""

import importlib
import logging
from typing import Any, Dict, Optional

from decoupler.constants import DENSE_DIMENSION_LIMIT

from .base import EigenSolver

logger = logging.getLogger(__name__)

# Registry of available solvers
SOLVERS = {
    "dense": "decoupler.solvers.dense.DenseEigenSolver",
    "sparse": "decoupler.solvers.sparse.SparseEigenSolver",
}

DEFAULT_SOLVER = "auto"


def get_solver(
    name: str = DEFAULT_SOLVER, dim: Optional[int] = None, config: Optional[Dict[str, Any]] = None
) -> EigenSolver:
    """
    Instantiate an eigensolver.

    Args:
        name: 'dense', 'sparse' or 'auto' (dense up to DENSE_DIMENSION_LIMIT states)
        dim: Matrix dimension, used by 'auto'
        config: Backend options (eigenpairs, tol, maxiter)

    Raises:
        ValueError: unknown solver name

    Example:
        >>> get_solver("auto", dim=216).name
        'dense'
    """
    name = name.lower()
    if name == "auto":
        name = "dense" if dim is None or dim <= DENSE_DIMENSION_LIMIT else "sparse"

    if name not in SOLVERS:
        available = ", ".join(["auto"] + list(SOLVERS))
        raise ValueError(f"Unknown eigensolver: '{name}'. Available solvers: {available}")

    module_path, class_name = SOLVERS[name].rsplit(".", 1)
    module = importlib.import_module(module_path)
    return getattr(module, class_name)(config)
