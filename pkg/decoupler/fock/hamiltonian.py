"""
Multimode circuit Hamiltonian on a truncated Fock space.

    H = sum_i [ w_i n_i + U_i/2 n_i (n_i - 1) + K_i (b_i^dag b_i^dag b_i + h.c.) ]
        - sum_{i<j} g_ij (b_i - b_i^dag)(b_j - b_j^dag)

Counter-rotating terms are kept. With rwa=True the coupling is reduced to
the excitation-conserving g_ij (b_i^dag b_j + h.c.) and the cubic terms are
dropped, which is the form the perturbative formulas assume.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from decoupler.circuit.model import DeviceParams
from decoupler.constants import (
    DEFAULT_DIMER_LEVELS,
    DEFAULT_MAX_DIMENSION,
    OVERLAP_THRESHOLD,
)
from decoupler.errors import InvalidSpecError, ResourceError
from decoupler.fock.operators import FockOperators, fock_basis

logger = logging.getLogger(__name__)

# Couplings below this magnitude (rad/ns) are left out of the operator sum
COUPLING_FLOOR = 1e-15


@dataclass(frozen=True)
class TruncationPolicy:
    """Levels per mode, optional total-excitation cutoff and a size budget."""

    levels: Union[int, Tuple[int, ...]] = DEFAULT_DIMER_LEVELS
    cutoff: Optional[int] = None
    tolerance: float = 2.0 * np.pi * 1e-6  # 1 kHz in rad/ns
    max_dim: int = DEFAULT_MAX_DIMENSION
    eigenpairs: Optional[int] = None
    overlap_threshold: float = OVERLAP_THRESHOLD

    def levels_for(self, n_modes: int) -> Tuple[int, ...]:
        if isinstance(self.levels, int):
            return (self.levels,) * n_modes
        if len(self.levels) != n_modes:
            raise InvalidSpecError(
                f"Truncation lists {len(self.levels)} mode sizes for {n_modes} modes"
            )
        return tuple(self.levels)

    def dimension(self, n_modes: int) -> int:
        levels = self.levels_for(n_modes)
        if self.cutoff is None:
            return int(np.prod(levels))
        return len(fock_basis(levels, self.cutoff))

    def validate(self, n_modes: int) -> None:
        levels = self.levels_for(n_modes)
        if min(levels) < 3:
            raise InvalidSpecError(f"At least 3 levels per mode are required, got {min(levels)}")
        if self.cutoff is not None and self.cutoff < 2:
            raise InvalidSpecError("Excitation cutoff must allow two excitations")


class HamiltonianAssembler:
    """
    Precomputed operator terms so that Hamiltonians for many parameter sets
    are weighted sums of fixed matrices.
    """

    def __init__(self, operators: FockOperators, rwa: bool = False):
        self.operators = operators
        self.rwa = rwa
        n = operators.n_modes
        self.pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        self.number_diag = np.stack([operators.number(i) for i in range(n)])
        self.kerr_diag = self.number_diag * (self.number_diag - 1.0) / 2.0
        self._cubic = [operators.cubic(i) for i in range(n)]
        if rwa:
            self._pair_ops = [operators.exchange(i, j) for i, j in self.pairs]
        else:
            self._pair_ops = [operators.quadrature_product(i, j) for i, j in self.pairs]
        self._dense_stack: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.operators.dim

    def diagonal(self, params: DeviceParams) -> np.ndarray:
        return params.omega @ self.number_diag + params.anharmonicity @ self.kerr_diag

    def pair_weights(self, params: DeviceParams) -> np.ndarray:
        """Prefactor of each pair operator: -g for the full form, +g under RWA."""
        g = np.array([params.coupling[i, j] for i, j in self.pairs])
        return g if self.rwa else -g

    def sparse(self, params: DeviceParams) -> sparse.csr_matrix:
        matrix = sparse.diags(self.diagonal(params)).tocsr()
        if not self.rwa:
            for i, K in enumerate(params.cubic):
                if K != 0.0:
                    matrix = matrix + K * self._cubic[i]
        for weight, op in zip(self.pair_weights(params), self._pair_ops):
            if abs(weight) > COUPLING_FLOOR:
                matrix = matrix + weight * op
        return matrix.tocsr()

    # ----- dense path used by time propagation -----

    def _stack(self) -> np.ndarray:
        if self._dense_stack is None:
            terms = [] if self.rwa else [op.toarray() for op in self._cubic]
            terms += [op.toarray() for op in self._pair_ops]
            self._dense_stack = np.stack(terms) if terms else np.zeros((0, self.dim, self.dim))
        return self._dense_stack

    def coefficients(self, params: DeviceParams) -> np.ndarray:
        """
        Flat coefficient vector [omega, U, K, pair weights] such that
        dense_from_coefficients(coefficients(p)) equals sparse(p).
        """
        cubic = np.zeros(0) if self.rwa else np.asarray(params.cubic, dtype=float)
        return np.concatenate(
            [
                np.asarray(params.omega, dtype=float),
                np.asarray(params.anharmonicity, dtype=float),
                cubic,
                self.pair_weights(params),
            ]
        )

    def dense_from_coefficients(self, coeffs: np.ndarray) -> np.ndarray:
        n = self.operators.n_modes
        omega, anharm = coeffs[:n], coeffs[n : 2 * n]
        rest = coeffs[2 * n :]
        matrix = np.tensordot(rest, self._stack(), axes=1) if len(rest) else np.zeros((self.dim, self.dim))
        matrix[np.diag_indices(self.dim)] += omega @ self.number_diag + anharm @ self.kerr_diag
        return matrix


@dataclass(eq=False)
class FockHamiltonian:
    """Hamiltonian matrix in the bare product basis with its bookkeeping."""

    mode_names: Tuple[str, ...]
    levels: Tuple[int, ...]
    cutoff: Optional[int]
    matrix: sparse.csr_matrix
    operators: FockOperators
    rwa: bool = False

    @property
    def dim(self) -> int:
        return self.operators.dim

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def index(self, label: Sequence[int]) -> int:
        return self.operators.index(label)

    def label(self, row: int) -> Tuple[int, ...]:
        return tuple(int(n) for n in self.operators.basis[row])

    def norm_bound(self) -> float:
        """Max column 1-norm, an upper bound on the spectral norm."""
        return float(abs(self.matrix).sum(axis=0).max()) if self.dim else 0.0

    def hermiticity_defect(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        scale = max(self.norm_bound(), 1e-300)
        return float(abs(diff).max()) / scale if diff.nnz else 0.0


_OPERATOR_CACHE: Dict[Tuple, FockOperators] = {}


def shared_operators(levels: Sequence[int], cutoff: Optional[int]) -> FockOperators:
    """FockOperators are immutable after construction; share them across calls."""
    key = (tuple(levels), cutoff)
    if key not in _OPERATOR_CACHE:
        _OPERATOR_CACHE[key] = FockOperators(levels, cutoff)
    return _OPERATOR_CACHE[key]


def build_hamiltonian(
    params: DeviceParams,
    trunc: TruncationPolicy,
    rwa: bool = False,
    assembler: Optional[HamiltonianAssembler] = None,
) -> FockHamiltonian:
    """
    Assemble the circuit Hamiltonian for the given mode parameters.

    Args:
        params: Quantized mode parameters
        trunc: Truncation policy
        rwa: Use the rotating-wave coupling and drop cubic terms
        assembler: Reuse precomputed operator terms; its rwa flag must match rwa

    Returns:
        FockHamiltonian (sparse, rad/ns)

    Raises:
        ResourceError: dimension above trunc.max_dim
        ValueError: assembler built for the other coupling form
    """
    if not (np.all(np.isfinite(params.omega)) and np.all(np.isfinite(params.coupling))):
        raise InvalidSpecError("DeviceParams contain non-finite values")

    n_modes = params.n_modes
    trunc.validate(n_modes)
    levels = trunc.levels_for(n_modes)

    if assembler is not None and assembler.rwa != rwa:
        raise ValueError(
            f"Assembler built with rwa={assembler.rwa} cannot assemble an rwa={rwa} Hamiltonian"
        )

    if assembler is None:
        dimension = trunc.dimension(n_modes)
        if dimension > trunc.max_dim:
            raise ResourceError(dimension, trunc.max_dim)
        assembler = HamiltonianAssembler(shared_operators(levels, trunc.cutoff), rwa=rwa)

    matrix = assembler.sparse(params)
    return FockHamiltonian(
        mode_names=params.mode_names,
        levels=levels,
        cutoff=trunc.cutoff,
        matrix=matrix,
        operators=assembler.operators,
        rwa=assembler.rwa,
    )
