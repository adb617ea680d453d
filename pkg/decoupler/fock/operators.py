"""
Bosonic operators on a truncated multimode Fock space.

The basis is the set of occupation tuples (n_0, ..., n_{M-1}) with
n_i < levels_i and, optionally, sum(n) <= cutoff. Rows are ordered
lexicographically, which is also ascending in the mixed-radix key, so a
state's row is found with a binary search.

Matrix elements are built directly between basis states rather than by
multiplying truncated ladder matrices; products would silently drop terms
whose intermediate state lies outside the excitation cutoff.
"""

import itertools
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse


def fock_basis(levels: Sequence[int], cutoff: Optional[int] = None) -> np.ndarray:
    """
    Occupation tuples of the truncated space.

    Args:
        levels: Levels per mode
        cutoff: Maximum total excitation number, or None

    Returns:
        Integer array of shape (dim, n_modes)
    """
    states = [
        state
        for state in itertools.product(*(range(n) for n in levels))
        if cutoff is None or sum(state) <= cutoff
    ]
    return np.array(states, dtype=np.int64).reshape(len(states), len(levels))


class FockOperators:
    """Basis bookkeeping and operator construction for a truncated space."""

    def __init__(self, levels: Sequence[int], cutoff: Optional[int] = None):
        self.levels = tuple(int(n) for n in levels)
        self.cutoff = cutoff
        self.basis = fock_basis(self.levels, cutoff)
        self.dim = len(self.basis)
        self.n_modes = len(self.levels)

        radix = np.ones(self.n_modes, dtype=np.int64)
        for i in range(self.n_modes - 2, -1, -1):
            radix[i] = radix[i + 1] * self.levels[i + 1]
        self._radix = radix
        self._keys = self.basis @ radix
        self._cache: Dict[Tuple, sparse.csr_matrix] = {}

    def index(self, label: Sequence[int]) -> int:
        """Row of a bare product state."""
        rows = self.rows(np.asarray([label]))
        if rows[0] < 0:
            raise KeyError(f"State {tuple(label)} is not in the truncated basis")
        return int(rows[0])

    def rows(self, states: np.ndarray) -> np.ndarray:
        """Rows of many states; -1 where a state is outside the basis."""
        states = np.asarray(states, dtype=np.int64)
        inside = np.all((states >= 0) & (states < np.array(self.levels)), axis=1)
        if self.cutoff is not None:
            inside &= states.sum(axis=1) <= self.cutoff
        keys = states @ self._radix
        pos = np.searchsorted(self._keys, keys)
        pos = np.clip(pos, 0, self.dim - 1)
        found = inside & (self._keys[pos] == keys)
        return np.where(found, pos, -1)

    def number(self, mode: int) -> np.ndarray:
        """Diagonal of n_mode."""
        return self.basis[:, mode].astype(float)

    def _transition(self, shifts: Dict[int, int]) -> sparse.csr_matrix:
        """
        Operator prod_i (ladder_i)^{|s_i|} with s_i = +1 (creation) or -1
        (annihilation) on distinct modes, built element by element.
        """
        key = tuple(sorted(shifts.items()))
        if key in self._cache:
            return self._cache[key]

        delta = np.zeros(self.n_modes, dtype=np.int64)
        amplitude = np.ones(self.dim)
        for mode, step in shifts.items():
            delta[mode] = step
            n = self.basis[:, mode].astype(float)
            amplitude = amplitude * (np.sqrt(n + 1.0) if step > 0 else np.sqrt(n))

        targets = self.rows(self.basis + delta)
        keep = (targets >= 0) & (amplitude != 0.0)
        matrix = sparse.csr_matrix(
            (amplitude[keep], (targets[keep], np.nonzero(keep)[0])), shape=(self.dim, self.dim)
        )
        self._cache[key] = matrix
        return matrix

    def annihilation(self, mode: int) -> sparse.csr_matrix:
        return self._transition({mode: -1})

    def creation(self, mode: int) -> sparse.csr_matrix:
        return self._transition({mode: +1})

    def quadrature_product(self, a: int, b: int) -> sparse.csr_matrix:
        """(b_a - b_a^dag)(b_b - b_b^dag) for a != b."""
        if a == b:
            raise ValueError("quadrature_product needs two distinct modes")
        return (
            self._transition({a: -1, b: -1})
            - self._transition({a: -1, b: +1})
            - self._transition({a: +1, b: -1})
            + self._transition({a: +1, b: +1})
        ).tocsr()

    def exchange(self, a: int, b: int) -> sparse.csr_matrix:
        """b_a^dag b_b + b_a b_b^dag, the excitation-conserving part."""
        return (self._transition({a: +1, b: -1}) + self._transition({a: -1, b: +1})).tocsr()

    def cubic(self, mode: int) -> sparse.csr_matrix:
        """b^dag b^dag b + b^dag b b on one mode."""
        n = self.basis[:, mode].astype(float)
        up = self.rows(self.basis + np.eye(self.n_modes, dtype=np.int64)[mode])
        # <n+1| b^dag b^dag b |n> = n sqrt(n+1)
        amplitude = n * np.sqrt(n + 1.0)
        keep = (up >= 0) & (amplitude != 0.0)
        raise_part = sparse.csr_matrix(
            (amplitude[keep], (up[keep], np.nonzero(keep)[0])), shape=(self.dim, self.dim)
        )
        return (raise_part + raise_part.T).tocsr()
