"""
Volume-axis discretization of the truncated domain (0, n).

A grid is a list of contiguous cells [lo, hi) with a pivot inside each one. A
NumberDensity holds one value per cell (the density g at the pivot) and is
implicitly zero outside (0, n). Moments use the pivot midpoint rule

    M_r = sum_i pivot_i^r * g_i * width_i

which is exact for the piecewise-constant representation.
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from src.data.initial_conditions import InitialCondition, TabulatedInitial
from src.utils.exceptions import ConfigError, ContractViolation, DomainError
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

SPACINGS = ("geometric", "uniform")


@dataclass(frozen=True, eq=False)
class VolumeGrid:
    """Immutable cell layout shared by states, operators and snapshots"""

    edges: np.ndarray
    pivots: np.ndarray
    widths: np.ndarray
    spacing: str
    ratio: float
    domain_max: float

    @property
    def size(self) -> int:
        return len(self.pivots)

    @property
    def zmin(self) -> float:
        return float(self.edges[0])

    @property
    def cells(self) -> List[Tuple[float, float, float]]:
        return [
            (float(lo), float(hi), float(p))
            for lo, hi, p in zip(self.edges[:-1], self.edges[1:], self.pivots)
        ]

    def same_as(self, other: "VolumeGrid") -> bool:
        return self is other or (
            self.size == other.size and np.array_equal(self.edges, other.edges)
        )


def build_grid(
    zmin: float, n: float, cell_count: int, spacing: str = "geometric"
) -> VolumeGrid:
    """
    Build a geometric or uniform grid on [zmin, n].

    Raises:
        ConfigError: If 0 < zmin < n or cell_count >= 2 fails, or spacing is unknown
    """
    errors = []
    if not (np.isfinite(zmin) and np.isfinite(n) and 0 < zmin < n):
        errors.append(f"grid bounds must satisfy 0 < zmin < n, got zmin={zmin}, n={n}")
    if int(cell_count) != cell_count or cell_count < 2:
        errors.append(f"grid.cells must be an integer >= 2, got {cell_count}")
    if spacing not in SPACINGS:
        errors.append(f"grid.spacing must be one of {list(SPACINGS)}, got {spacing!r}")
    if errors:
        raise ConfigError(errors)

    cell_count = int(cell_count)
    if spacing == "geometric":
        ratio = (n / zmin) ** (1.0 / cell_count)
        edges = zmin * ratio ** np.arange(cell_count + 1, dtype=float)
        edges[0] = zmin
        edges[-1] = n
        pivots = np.sqrt(edges[:-1] * edges[1:])
    else:
        ratio = 1.0
        edges = np.linspace(zmin, n, cell_count + 1)
        pivots = 0.5 * (edges[:-1] + edges[1:])

    return VolumeGrid(
        edges=edges,
        pivots=pivots,
        widths=np.diff(edges),
        spacing=spacing,
        ratio=float(ratio),
        domain_max=float(n),
    )


@dataclass
class NumberDensity:
    """Cell values of g(., t) on a grid"""

    grid: VolumeGrid
    values: np.ndarray
    time: float = 0.0
    unresolved_mass: float = field(default=0.0)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.size,):
            raise ContractViolation(
                f"state has {self.values.shape} values for a {self.grid.size}-cell grid"
            )
        if np.any(~np.isfinite(self.values)) or np.any(self.values < 0):
            raise DomainError("number density values must be finite and nonnegative")
        if self.time < 0:
            raise DomainError(f"time must be nonnegative, got {self.time}")

    def copy(self) -> "NumberDensity":
        return NumberDensity(
            self.grid, self.values.copy(), self.time, self.unresolved_mass
        )

    @classmethod
    def zeros(cls, grid: VolumeGrid) -> "NumberDensity":
        return cls(grid, np.zeros(grid.size))


def unresolved_mass(g0: InitialCondition, grid: VolumeGrid) -> float:
    """Mass of g0 on (0, zmin), below the first cell"""
    return float(g0.mass(0.0, grid.zmin))


def project_initial(
    g0: InitialCondition, grid: VolumeGrid, weighting: str = "mass"
) -> NumberDensity:
    """
    Project g0 onto the grid.

    With weighting="mass" each cell value is chosen so that pivot * value * width
    equals the exact mass of g0 on the cell; the mass below zmin is folded into
    the first cell, so M1 of the projection equals int_0^n z g0 dz. With
    weighting="average" the value is the cell average of g0 and the mass below
    zmin is dropped.

    Args:
        g0: Initial condition
        grid: Target grid
        weighting: "mass" or "average"

    Returns:
        NumberDensity at t = 0, carrying the unresolved mass as a diagnostic

    Raises:
        DomainError: If g0 has nonfinite or negative cell integrals on (0, n)
    """
    if weighting not in ("mass", "average"):
        raise ValueError(f"weighting must be 'mass' or 'average', got {weighting!r}")

    if isinstance(g0, TabulatedInitial) and g0.matches(grid.pivots):
        return NumberDensity(grid, g0.densities.copy(), 0.0)

    below = unresolved_mass(g0, grid)
    if weighting == "mass":
        cell_integrals = np.array([g0.mass(lo, hi) for lo, hi, _ in grid.cells])
        cell_integrals[0] += below
        divisor = grid.pivots * grid.widths
    else:
        cell_integrals = np.array([g0.number(lo, hi) for lo, hi, _ in grid.cells])
        divisor = grid.widths

    if not np.all(np.isfinite(cell_integrals)) or not np.isfinite(below):
        raise DomainError(
            f"initial condition {g0.describe()} has nonfinite moments on (0, n)"
        )
    if np.any(cell_integrals < 0):
        raise DomainError(f"initial condition {g0.describe()} takes negative values")

    if below > 0:
        logger.info(f"Unresolved initial mass below zmin={grid.zmin:g}: {below:.3e}")
    return NumberDensity(grid, cell_integrals / divisor, 0.0, below)


def moment(g: NumberDensity, r: float) -> float:
    if r < 0:
        raise DomainError(f"moment order must be nonnegative, got {r}")
    grid = g.grid
    return float(np.sum(grid.pivots**r * g.values * grid.widths))


def weighted_norm(g: NumberDensity) -> float:
    """int (1 + z) g dz, the norm of the solution space"""
    grid = g.grid
    return float(np.sum((1.0 + grid.pivots) * g.values * grid.widths))


def subgrid(grid: VolumeGrid, n: float) -> VolumeGrid:
    """
    Leading cells of `grid` covering [zmin, n].

    The edges are shared with `grid`, except that the last one is moved to n
    when n does not fall on an edge, so states on grids of one family can be
    compared cell by cell.
    """
    if not grid.zmin < n <= grid.domain_max:
        raise ConfigError(
            [f"sub-grid bound n={n} must lie in (zmin, {grid.domain_max}]"]
        )
    cell_count = int(np.argmin(np.abs(grid.edges[1:] - n))) + 1
    cell_count = max(cell_count, 2)
    edges = grid.edges[: cell_count + 1].copy()
    if edges[-2] >= n:
        raise ConfigError([f"sub-grid bound n={n} leaves fewer than two cells"])
    edges[-1] = n
    if grid.spacing == "geometric":
        pivots = np.sqrt(edges[:-1] * edges[1:])
    else:
        pivots = 0.5 * (edges[:-1] + edges[1:])
    return VolumeGrid(
        edges=edges,
        pivots=pivots,
        widths=np.diff(edges),
        spacing=grid.spacing,
        ratio=grid.ratio,
        domain_max=float(n),
    )
