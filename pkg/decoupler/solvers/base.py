"""
Base eigensolver - Abstract interface for Hermitian eigenvalue backends

Dense and sparse backends return the same thing: ascending eigenvalues and
column eigenvectors. The spectrum code never needs to know which one ran.
"""

import logging
from abc import ABC, abstractmethod
from typing import Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)


class EigenSolver(ABC):
    """
    Abstract base class for eigensolvers.

    Implementations receive a real symmetric or complex Hermitian matrix
    (dense ndarray or scipy sparse) and return eigenpairs sorted by energy.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Solver name as used in the registry ('dense', 'sparse')."""

    @property
    def partial(self) -> bool:
        """True if the solver returns only the lowest eigenpairs."""
        return False

    @abstractmethod
    def solve(self, matrix, k: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Compute eigenpairs.

        Args:
            matrix: Hermitian matrix
            k: Number of lowest eigenpairs wanted (None: all the solver can give)

        Returns:
            (eigenvalues ascending, eigenvectors as columns)

        Raises:
            EigensolverError: the backend did not converge
        """

    def __repr__(self) -> str:
        return f"<{type(self).__name__} name={self.name!r}>"
