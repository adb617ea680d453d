"""Dense LAPACK eigensolver for Hamiltonians up to a few thousand states."""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy import linalg, sparse

from decoupler.errors import EigensolverError
from decoupler.solvers.base import EigenSolver

logger = logging.getLogger(__name__)


class DenseEigenSolver(EigenSolver):
    """Full diagonalization with scipy.linalg.eigh."""

    def __init__(self, config=None):
        self.config = config or {}

    @property
    def name(self) -> str:
        return "dense"

    def solve(self, matrix, k: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        array = matrix.toarray() if sparse.issparse(matrix) else np.asarray(matrix)
        dim = array.shape[0]
        subset = None if k is None or k >= dim else [0, k - 1]
        try:
            values, vectors = linalg.eigh(array, subset_by_index=subset)
        except linalg.LinAlgError as e:
            raise EigensolverError(f"Dense eigensolver failed on a {dim}x{dim} matrix: {e}")
        return values, vectors
