"""
Idle point search - flux operating points with localized qubits and no ZZ

find_idle_flux scans a flux window on a grid and refines the best cell,
either minimizing the delocalization epsilon or locating the zero of the
ZZ coupling. The manifold and robustness grids run that search once per
cell with the coupler (or its fabrication errors) changed.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from decoupler.circuit.model import CircuitModel, CircuitSpec
from decoupler.constants import TWO_PI, phi0_to_rad
from decoupler.crosstalk import PairLabels, delocalization_exact, dressed_spectrum, zz_exact
from decoupler.errors import LabelingError, NumericalError, RegimeError, SearchError
from decoupler.fock import HamiltonianAssembler, TruncationPolicy, shared_operators
from decoupler.logging_config import OperationLogger
from decoupler.parallel import ordered_map

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = (phi0_to_rad(0.35), phi0_to_rad(0.5))
OBJECTIVES = ("epsilon", "zeta")

# epsilon below this everywhere means the qubits are uncoupled
DEGENERATE_EPSILON = 1e-14

# Penalty returned to the bounded minimizer where labeling fails
LABEL_PENALTY = 1.0


# ===== DOMAIN TYPES =====


@dataclass
class IdleSearchResult:
    """Operating point found by find_idle_flux. Flux in rad, frequencies in rad/ns."""

    phi_ext: float
    omega_c: float
    epsilon: float
    zeta: float
    objective: str = "epsilon"
    window: Tuple[float, float] = DEFAULT_WINDOW
    bracket: Tuple[float, float] = (float("nan"), float("nan"))
    grid_points: int = 0
    iterations: int = 0
    evaluations: int = 0
    degenerate: bool = False
    flags: List[str] = field(default_factory=list)

    def as_row(self) -> Dict[str, float]:
        return {
            "phi_ext_over_Phi0": self.phi_ext / (2.0 * np.pi),
            "omega_c_GHz": self.omega_c / TWO_PI,
            "epsilon": self.epsilon,
            "zeta_kHz": self.zeta / TWO_PI * 1e6,
        }


@dataclass(frozen=True)
class FabricationError:
    """
    Relative fabrication errors of the coupler.

    d_EC rescales the coupler charging energy. d_EJ is the combined junction
    error; split() distributes it over the upper junction and the alpha
    branch with opposite signs, so that sgn(a) sqrt(a^2 + b^2) = d_EJ.
    """

    d_EC: float = 0.0
    d_EJ: float = 0.0

    def split(self) -> Tuple[float, float]:
        part = self.d_EJ / np.sqrt(2.0)
        return part, -part

    def apply(self, spec: CircuitSpec) -> CircuitSpec:
        d_upper, d_lower = self.split()
        return spec.with_updates(
            EJc=spec.EJc * (1.0 - d_upper),
            alpha=spec.alpha * (1.0 - d_lower) / (1.0 - d_upper),
            coupler_charging_scale=spec.coupler_charging_scale * (1.0 - self.d_EC),
        )


# ===== SEARCH =====


class _PointEvaluator:
    """Caches (epsilon, zeta, omega_c) per flux for one circuit."""

    def __init__(self, model: CircuitModel, trunc: TruncationPolicy, rwa: bool = False):
        self.model = model
        self.trunc = trunc
        self.rwa = rwa
        levels = trunc.levels_for(3)
        self.assembler = HamiltonianAssembler(shared_operators(levels, trunc.cutoff), rwa=rwa)
        self.pair = PairLabels.for_pair(("q1", "c", "q2"), "q1", "q2")
        self.cache: Dict[float, Tuple[float, float, float]] = {}

    def __call__(self, phi: float) -> Tuple[float, float, float]:
        phi = float(phi)
        if phi not in self.cache:
            params = self.model.params_at(phi)
            labeled = dressed_spectrum(
                params, self.trunc, pair=self.pair, rwa=self.rwa, assembler=self.assembler
            )
            self.cache[phi] = (
                delocalization_exact(labeled, self.pair),
                zz_exact(labeled, self.pair),
                params.frequency("c"),
            )
        return self.cache[phi]

    def safe(self, phi: float) -> Tuple[float, float, float]:
        try:
            return self(phi)
        except LabelingError:
            nan = float("nan")
            return nan, nan, nan


def _scan(evaluate: _PointEvaluator, grid: np.ndarray, threads: int) -> np.ndarray:
    return np.array(ordered_map(evaluate.safe, grid, threads=threads, desc="idle scan"))


def _refine_epsilon(evaluate: _PointEvaluator, grid, values, xtol) -> Tuple[float, Tuple, int]:
    k = int(np.nanargmin(values[:, 0]))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]

    def objective(phi):
        try:
            return evaluate(phi)[0]
        except LabelingError:
            return LABEL_PENALTY

    result = minimize_scalar(objective, bounds=(lo, hi), method="bounded", options={"xatol": xtol})
    best = float(result.x)
    # the bounded search never evaluates the bracket ends; keep the grid point if it is better
    if values[k, 0] < objective(best):
        best = float(grid[k])
    return best, (float(lo), float(hi)), int(result.nfev)


def _refine_zeta(evaluate: _PointEvaluator, grid, values, xtol) -> Tuple[float, Tuple, int]:
    zeta = values[:, 1]
    finite = np.isfinite(zeta)
    crossings = [
        k for k in range(len(grid) - 1) if finite[k] and finite[k + 1] and zeta[k] * zeta[k + 1] <= 0
    ]
    if crossings:
        # the crossing nearest the epsilon minimum is the one the idle point belongs to
        k_eps = int(np.nanargmin(values[:, 0]))
        k = min(crossings, key=lambda c: abs(c - k_eps))
        lo, hi = float(grid[k]), float(grid[k + 1])
        if zeta[k] == 0.0:
            return lo, (lo, hi), 0
        root, info = brentq(
            lambda phi: evaluate(phi)[1], lo, hi, xtol=xtol, full_output=True, disp=False
        )
        return float(root), (lo, hi), int(info.function_calls)

    k = int(np.nanargmin(np.abs(zeta)))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]

    def magnitude(phi):
        value = evaluate.safe(phi)[1]
        return abs(value) if np.isfinite(value) else np.inf

    result = minimize_scalar(
        magnitude,
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": xtol},
    )
    return float(result.x), (float(lo), float(hi)), int(result.nfev)


def find_idle_flux(
    spec: Union[CircuitSpec, CircuitModel],
    window: Tuple[float, float] = DEFAULT_WINDOW,
    objective: str = "epsilon",
    trunc: Optional[TruncationPolicy] = None,
    grid_points: int = 41,
    rwa: bool = False,
    xtol: float = 1e-9,
    max_retries: int = 3,
    threads: int = 1,
    op_logger: Optional[OperationLogger] = None,
) -> IdleSearchResult:
    """
    Locate the idle flux of the coupler.

    Args:
        spec: Circuit description or a prepared CircuitModel
        window: Flux interval in rad; must lie in the single-well regime
        objective: 'epsilon' (minimal delocalization) or 'zeta' (zero ZZ)
        trunc: Truncation policy (default: 6 levels per mode)
        grid_points: Coarse grid size before refinement
        rwa: Use the rotating-wave Hamiltonian
        xtol: Flux tolerance of the refinement, rad
        max_retries: Grid doublings when labeling fails on most of the grid
        threads: Worker threads for the grid scan
        op_logger: Optional OperationLogger for per-search events

    Returns:
        IdleSearchResult with zeta and epsilon at the chosen flux

    Raises:
        SearchError: labeling keeps failing after all retries
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"Unknown idle objective: '{objective}'. Available: {', '.join(OBJECTIVES)}")
    model = spec if isinstance(spec, CircuitModel) else CircuitModel(spec)
    trunc = trunc or TruncationPolicy()
    evaluate = _PointEvaluator(model, trunc, rwa=rwa)
    lo, hi = float(min(window)), float(max(window))

    points = grid_points
    for attempt in range(max_retries + 1):
        grid = np.linspace(lo, hi, points)
        values = _scan(evaluate, grid, threads)
        usable = np.isfinite(values[:, 0])
        if usable.sum() >= max(3, len(grid) // 2):
            break
        logger.warning(
            f"Labeling failed at {len(grid) - usable.sum()} of {len(grid)} fluxes; refining grid"
        )
        if op_logger:
            op_logger.warning("grid refinement", attempt=attempt, failed=int(len(grid) - usable.sum()))
        points = 2 * points - 1
    else:
        raise SearchError(
            f"Idle search failed: states could not be labeled on most of [{lo:.4f}, {hi:.4f}] rad "
            f"after {max_retries} grid refinements"
        )

    flags = []
    if np.nanmax(values[:, 0]) < DEGENERATE_EPSILON:
        eps, zeta, omega_c = evaluate(lo)
        logger.info("Qubits are uncoupled over the whole window; returning the window edge")
        return IdleSearchResult(
            phi_ext=lo,
            omega_c=omega_c,
            epsilon=eps,
            zeta=zeta,
            objective=objective,
            window=(lo, hi),
            grid_points=len(grid),
            evaluations=len(evaluate.cache),
            degenerate=True,
            flags=["uncoupled"],
        )

    refine = _refine_epsilon if objective == "epsilon" else _refine_zeta
    try:
        best, bracket, iterations = refine(evaluate, grid, values, xtol)
        eps, zeta, omega_c = evaluate(best)
    except LabelingError as e:
        raise SearchError(f"Idle refinement hit an unlabeled point: {e}")

    if best - lo < 2 * xtol or hi - best < 2 * xtol:
        flags.append("minimum at window edge")

    result = IdleSearchResult(
        phi_ext=best,
        omega_c=omega_c,
        epsilon=eps,
        zeta=zeta,
        objective=objective,
        window=(lo, hi),
        bracket=bracket,
        grid_points=len(grid),
        iterations=iterations,
        evaluations=len(evaluate.cache),
        flags=flags,
    )
    logger.info(
        f"Idle point ({objective}): phi={best / (2 * np.pi):.6f} Phi0, "
        f"omega_c={omega_c / TWO_PI:.4f} GHz, eps={eps:.3e}, zeta={zeta / TWO_PI * 1e6:.3f} kHz"
    )
    if op_logger:
        op_logger.info("idle point", **result.as_row())
    return result


# ===== GRIDS =====

CELL_OK = "ok"
CELL_OUT_OF_REGIME = "out-of-regime"
CELL_FAILED = "failed"


@dataclass
class CellGrid:
    """Results of one idle search per grid cell, indexed [row, column]."""

    rows: np.ndarray
    columns: np.ndarray
    zeta: np.ndarray
    epsilon: np.ndarray
    omega_c: np.ndarray
    phi_ext: np.ndarray
    status: np.ndarray
    row_name: str = "row"
    column_name: str = "column"
    contour: List[Tuple[float, float]] = field(default_factory=list)

    @classmethod
    def empty(cls, rows, columns, row_name, column_name) -> "CellGrid":
        shape = (len(rows), len(columns))
        return cls(
            rows=np.asarray(rows, dtype=float),
            columns=np.asarray(columns, dtype=float),
            zeta=np.full(shape, np.nan),
            epsilon=np.full(shape, np.nan),
            omega_c=np.full(shape, np.nan),
            phi_ext=np.full(shape, np.nan),
            status=np.full(shape, CELL_OK, dtype=object),
            row_name=row_name,
            column_name=column_name,
        )

    def fill(self, i: int, j: int, outcome) -> None:
        if isinstance(outcome, IdleSearchResult):
            self.zeta[i, j] = outcome.zeta
            self.epsilon[i, j] = outcome.epsilon
            self.omega_c[i, j] = outcome.omega_c
            self.phi_ext[i, j] = outcome.phi_ext
        else:
            self.status[i, j] = outcome

    def fraction(self, zeta_max: float, epsilon_max: float) -> float:
        """Share of cells with |zeta| < zeta_max and epsilon < epsilon_max."""
        with np.errstate(invalid="ignore"):
            good = (np.abs(self.zeta) < zeta_max) & (self.epsilon < epsilon_max)
        return float(np.sum(good)) / self.zeta.size

    def cells(self) -> List[Dict[str, object]]:
        """Flat rows for CSV output."""
        out = []
        for i, r in enumerate(self.rows):
            for j, c in enumerate(self.columns):
                out.append(
                    {
                        self.row_name: r,
                        self.column_name: c,
                        "omega_c_GHz": self.omega_c[i, j] / TWO_PI,
                        "phi_ext_over_Phi0": self.phi_ext[i, j] / (2.0 * np.pi),
                        "zeta_kHz": self.zeta[i, j] / TWO_PI * 1e6,
                        "epsilon": self.epsilon[i, j],
                        "status": self.status[i, j],
                    }
                )
        return out


def _guarded_search(spec: CircuitSpec, **search_kwargs):
    """Run one cell's search; regime problems mark the cell instead of failing the grid."""
    try:
        return find_idle_flux(spec, **search_kwargs)
    except RegimeError as e:
        logger.debug(f"Cell out of regime: {e}")
        return CELL_OUT_OF_REGIME
    except NumericalError as e:
        logger.warning(f"Cell search failed: {e}")
        return CELL_FAILED


def _edge_point(a, b, za, zb, search, steps: int) -> Tuple[float, float]:
    """Zero of zeta on the segment a-b by bisection, finished with linear interpolation."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    for _ in range(steps):
        mid = 0.5 * (a + b)
        zm = search(mid)
        if not np.isfinite(zm):
            break
        if za * zm <= 0:
            b, zb = mid, zm
        else:
            a, za = mid, zm
    t = za / (za - zb) if za != zb else 0.5
    point = a + t * (b - a)
    return float(point[0]), float(point[1])


def zero_zz_manifold(
    base: CircuitSpec,
    EJ_grid: Sequence[float],
    alpha_grid: Sequence[float],
    window: Tuple[float, float] = DEFAULT_WINDOW,
    trunc: Optional[TruncationPolicy] = None,
    bisection_steps: int = 6,
    threads: int = 1,
    op_logger: Optional[OperationLogger] = None,
) -> CellGrid:
    """
    Residual zeta at the epsilon-optimal flux over a grid of coupler designs.

    Args:
        base: Circuit whose coupler EJc and alpha are varied
        EJ_grid: Coupler junction energies, rad/ns (rows)
        alpha_grid: Junction ratios (columns)
        window: Flux window of every cell's search, rad
        trunc: Truncation policy
        bisection_steps: Extra searches per contour edge (0: linear interpolation only)
        threads: Worker threads over cells

    Returns:
        CellGrid with rows EJ (rad/ns), columns alpha and the zero contour as
        (EJ, alpha) points; cells the coupler model cannot describe are marked
    """
    trunc = trunc or TruncationPolicy()
    grid = CellGrid.empty(EJ_grid, alpha_grid, "EJc", "alpha")
    cells = [(i, j) for i in range(len(grid.rows)) for j in range(len(grid.columns))]

    def cell_zeta(point) -> float:
        outcome = _guarded_search(
            base.with_updates(EJc=float(point[0]), alpha=float(point[1])),
            window=window,
            trunc=trunc,
        )
        return outcome.zeta if isinstance(outcome, IdleSearchResult) else float("nan")

    def task(cell):
        i, j = cell
        return _guarded_search(
            base.with_updates(EJc=float(grid.rows[i]), alpha=float(grid.columns[j])),
            window=window,
            trunc=trunc,
        )

    for (i, j), outcome in zip(cells, ordered_map(task, cells, threads=threads, desc="zz map")):
        grid.fill(i, j, outcome)

    # sign changes along grid edges, rows then columns, in fixed order
    edges = []
    for i in range(len(grid.rows)):
        for j in range(len(grid.columns)):
            for di, dj in ((0, 1), (1, 0)):
                k, l = i + di, j + dj
                if k >= len(grid.rows) or l >= len(grid.columns):
                    continue
                za, zb = grid.zeta[i, j], grid.zeta[k, l]
                if np.isfinite(za) and np.isfinite(zb) and za * zb < 0:
                    edges.append(((grid.rows[i], grid.columns[j]), (grid.rows[k], grid.columns[l]), za, zb))

    grid.contour = ordered_map(
        lambda e: _edge_point(*e, cell_zeta, bisection_steps), edges, threads=threads, desc="contour"
    )

    marked = int(np.sum(grid.status != CELL_OK))
    logger.info(f"ZZ manifold: {len(cells)} cells, {marked} marked, {len(grid.contour)} contour points")
    if op_logger:
        op_logger.info("zz manifold", cells=len(cells), marked=marked, contour_points=len(grid.contour))
    return grid


def robustness_grid(
    base: CircuitSpec,
    d_EC_values: Sequence[float],
    d_EJ_values: Sequence[float],
    window: Tuple[float, float] = DEFAULT_WINDOW,
    trunc: Optional[TruncationPolicy] = None,
    objective: str = "zeta",
    threads: int = 1,
    op_logger: Optional[OperationLogger] = None,
) -> CellGrid:
    """
    Residual zeta and epsilon after flux re-optimization for every combination
    of coupler fabrication errors.

    Args:
        base: Unperturbed circuit
        d_EC_values: Relative charging-energy errors (rows)
        d_EJ_values: Relative junction errors (columns)
        objective: Flux criterion per cell, 'zeta' (default) or 'epsilon'

    Returns:
        CellGrid with rows d_EC and columns d_EJ
    """
    trunc = trunc or TruncationPolicy()
    grid = CellGrid.empty(d_EC_values, d_EJ_values, "d_EC", "d_EJ")
    cells = [(i, j) for i in range(len(grid.rows)) for j in range(len(grid.columns))]

    def task(cell):
        i, j = cell
        error = FabricationError(d_EC=float(grid.rows[i]), d_EJ=float(grid.columns[j]))
        return _guarded_search(error.apply(base), window=window, trunc=trunc, objective=objective)

    for (i, j), outcome in zip(cells, ordered_map(task, cells, threads=threads, desc="robustness")):
        grid.fill(i, j, outcome)

    if op_logger:
        op_logger.info(
            "robustness grid",
            cells=len(cells),
            suppressed=grid.fraction(TWO_PI * 1e-6, 5e-4),
        )
    return grid
