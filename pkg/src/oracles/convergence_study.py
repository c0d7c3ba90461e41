"""
Self-convergence of the truncated problems as the domain bound n grows.

All runs share zmin and the grid ratio: each grid is the leading part of the
grid built for the largest n, so two runs differ only through truncation. Time
steps are fixed and identical across runs for the same reason. Distances are
int |g_n - g_ref| dz over (0, n) with the largest-n run as reference.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.data.initial_conditions import InitialCondition
from src.engine.grid import (
    NumberDensity,
    VolumeGrid,
    build_grid,
    moment,
    project_initial,
    subgrid,
)
from src.engine.integrator import TimeStepperConfig, run
from src.engine.metrics.density_metrics import DensityMetrics
from src.engine.operators import OperatorWorkspace
from src.model.model_factory import CollisionModel
from src.utils.exceptions import ConfigError
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

DEFAULT_CELLS_PER_DOUBLING = 8
ZMIN_FRACTION = 1e-4


@dataclass
class ConvergenceStudyResult:
    table: pd.DataFrame
    monotone: bool
    reference_n: float
    states: Dict[float, NumberDensity]

    def to_long_frame(self) -> pd.DataFrame:
        """Rows (case, n, cells, metric, value) for the study CSV"""
        melted = self.table.melt(
            id_vars=["n", "cells"],
            value_vars=["l1_distance", "mass_drift"],
            var_name="metric",
            value_name="value",
        )
        melted.insert(0, "case", "truncation")
        return melted


def study_grid(
    n_values: Sequence[float],
    zmin: Optional[float] = None,
    cells_per_doubling: int = DEFAULT_CELLS_PER_DOUBLING,
) -> VolumeGrid:
    """
    Geometric grid on [zmin, max(n_values)] with a fixed number of cells per
    doubling of volume.

    The default zmin is the smallest n divided by the power of two closest to
    1 / ZMIN_FRACTION, so every n that is a power-of-two multiple of the
    smallest one falls exactly on an edge.
    """
    n_min, n_max = float(min(n_values)), float(max(n_values))
    if zmin is None:
        zmin = n_min / 2.0 ** round(math.log2(1.0 / ZMIN_FRACTION))
    doublings = math.log2(n_max / zmin)
    cells = max(int(round(cells_per_doubling * doublings)), 2)
    return build_grid(zmin, n_max, cells, "geometric")


def _run_case(
    n: float,
    reference_grid: VolumeGrid,
    model: CollisionModel,
    initial: InitialCondition,
    time_config: TimeStepperConfig,
) -> NumberDensity:
    if n == reference_grid.domain_max:
        grid = reference_grid
    else:
        grid = subgrid(reference_grid, n)
    kernel = model.kernel.with_truncation(n)
    ws = OperatorWorkspace.build(grid, kernel, model.probability, model.distribution)
    g0 = project_initial(initial, grid)
    result = run(g0, ws, time_config)
    drift = result.series.rows[-1]["mass_drift"]
    logger.info(f"n={n:g}: {grid.size} cells, M1 drift {drift:.3e}")
    return result.final


def truncation_convergence_study(
    model: CollisionModel,
    initial: InitialCondition,
    n_values: Sequence[float],
    t_end: float,
    time_config: Optional[TimeStepperConfig] = None,
    zmin: Optional[float] = None,
    cells_per_doubling: int = DEFAULT_CELLS_PER_DOUBLING,
    threads: int = 1,
) -> ConvergenceStudyResult:
    """
    Run the truncated problem for every n and measure the distance to the largest n.

    Args:
        model: Kernel, coalescence probability and breakup distribution; the kernel's
            truncation is replaced by each n
        initial: Physical initial condition shared by all runs
        n_values: Nondecreasing domain bounds; the last is the reference and a
            repeated n reuses one run
        t_end: Time at which states are compared
        time_config: Method and step; adaptivity is switched off so every run
            takes the same steps
        threads: Worker threads, one run per worker

    Returns:
        ConvergenceStudyResult; non-monotone distances are flagged, not raised
    """
    n_values = [float(n) for n in n_values]
    if len(n_values) < 2 or any(b < a for a, b in zip(n_values, n_values[1:])):
        raise ConfigError(
            ["study.n_values must hold at least two nondecreasing values"]
        )

    base = time_config or TimeStepperConfig.from_dict({"t_end": t_end})
    dt = min(base.dt_init, t_end) if t_end > 0 else base.dt_init
    fixed = replace(
        base,
        t_end=t_end,
        dt_init=dt,
        dt_min=min(base.dt_min, dt),
        dt_max=max(dt, t_end),
        snapshot_times=(),
        adaptive=False,
    )
    reference_grid = study_grid(n_values, zmin, cells_per_doubling)
    logger.info(
        f"Truncation study over n={n_values} to t={t_end:g}: "
        f"zmin={reference_grid.zmin:.6g}, ratio={reference_grid.ratio:.6g}, "
        f"{threads} thread(s)"
    )

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        futures = {
            n: pool.submit(_run_case, n, reference_grid, model, initial, fixed)
            for n in dict.fromkeys(n_values)
        }
        states = {n: future.result() for n, future in futures.items()}

    reference = states[n_values[-1]]
    reference_mass = {
        n: moment(project_initial(initial, state.grid), 1)
        for n, state in states.items()
    }
    rows: List[Dict[str, float]] = []
    for n in n_values:
        state = states[n]
        mass0 = reference_mass[n]
        rows.append(
            {
                "n": n,
                "cells": state.grid.size,
                "l1_distance": DensityMetrics.l1_distance(state, reference),
                "mass_drift": (moment(state, 1) - mass0) / mass0 if mass0 else 0.0,
            }
        )
    table = pd.DataFrame(rows)

    distances = table["l1_distance"].to_numpy()[:-1]
    # equal n share one state, so only distinct neighbours must strictly decrease
    monotone = all(
        later < earlier or n_later == n_earlier
        for earlier, later, n_earlier, n_later in zip(
            distances, distances[1:], n_values, n_values[1:]
        )
    )
    if not monotone:
        logger.warning(
            f"Truncation distances are not strictly decreasing: {distances.tolist()}"
        )
    return ConvergenceStudyResult(
        table=table, monotone=monotone, reference_n=n_values[-1], states=states
    )
