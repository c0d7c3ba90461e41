"""
Closed-form solution of constant-kernel coagulation.

For Phi = 1, E = 1 and g0(z) = exp(-z) the coagulation equation is solved by

    g(z, t) = (2 / (2 + t))^2 exp(-2 z / (2 + t)),    M0(t) = 2 / (2 + t),    M1(t) = 1.
"""

import numpy as np

from src.data.initial_conditions import ExponentialInitial
from src.engine.grid import VolumeGrid
from src.model.collision_kernel import ArrayLike, _unwrap, as_positive_volumes
from src.utils.exceptions import DomainError


def _check_time(t: float) -> float:
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise DomainError(f"time must be finite and nonnegative, got {t}")
    return t


def smoluchowski_constant_analytic(z: ArrayLike, t: float) -> ArrayLike:
    t = _check_time(t)
    z = as_positive_volumes(z=z)["z"]
    scale = 2.0 / (2.0 + t)
    return _unwrap(scale**2 * np.exp(-scale * z))


def smoluchowski_constant_m0(t: float) -> float:
    return 2.0 / (2.0 + _check_time(t))


def smoluchowski_constant_solution(t: float) -> ExponentialInitial:
    """The analytic g(., t): exponential profile with number M0(t), scale (2 + t) / 2"""
    t = _check_time(t)
    return ExponentialInitial({"number": 2.0 / (2.0 + t), "scale": (2.0 + t) / 2.0})


def smoluchowski_constant_cell_counts(grid: VolumeGrid, t: float) -> np.ndarray:
    """Exact particle count of the analytic solution in every grid cell"""
    solution = smoluchowski_constant_solution(t)
    return np.array([solution.number(lo, hi) for lo, hi, _ in grid.cells])
