"""
Reference cases the solver is checked against.

Each case builds its own model and grid from constants alone, runs, and returns
rows (case, reference, metric, value, tolerance, passed).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.data.initial_conditions import ExponentialInitial
from src.engine.grid import NumberDensity, build_grid, project_initial
from src.engine.integrator import TimeStepperConfig, run
from src.engine.metrics.density_metrics import DensityMetrics
from src.engine.metrics.moment_metrics import MomentMetrics
from src.engine.operators import OperatorWorkspace
from src.model.model_factory import CollisionModel, ModelFactory
from src.utils.logger import setup_logger

from .analytic import smoluchowski_constant_cell_counts, smoluchowski_constant_m0
from .brute_force import brute_force_terms, relative_discrepancy

logger = setup_logger(__name__)

REFERENCES = ("AnalyticClosedForm", "RefinedSelfConvergence", "BruteForceSmallGrid")


@dataclass(frozen=True)
class OracleSettings:
    cells: int = 256
    n: float = 50.0
    t_end: float = 1.0
    rel_tol: float = 1e-6
    brute_force_states: int = 100
    seed: int = 0


@dataclass(frozen=True)
class OracleCase:
    name: str
    reference: str
    tolerance: float
    evaluate: Callable[[OracleSettings], List[Dict]]

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError(f"oracle tolerance must be positive, got {self.tolerance}")
        if self.reference not in REFERENCES:
            raise ValueError(f"unknown oracle reference {self.reference}")


def _model(kernel: Dict, probability: Dict, breakup: Dict, n: float) -> CollisionModel:
    return ModelFactory.create_model(kernel, probability, breakup, truncation_n=n)


def _simulate(
    model: CollisionModel, settings: OracleSettings, include_breakage: bool = True
):
    grid = build_grid(1e-4 * settings.n, settings.n, settings.cells, "geometric")
    ws = OperatorWorkspace.build(
        grid, model.kernel, model.probability, model.distribution, include_breakage
    )
    g0 = project_initial(ExponentialInitial({"number": 1.0, "scale": 1.0}), grid)
    time_config = TimeStepperConfig.from_dict(
        {"t_end": settings.t_end, "rel_tol": settings.rel_tol}
    )
    return run(g0, ws, time_config)


def _row(
    case: str,
    metric: str,
    value: float,
    tolerance: float,
    passed: Optional[bool] = None,
):
    return {
        "case": case,
        "metric": metric,
        "value": float(value),
        "tolerance": float(tolerance),
        "passed": bool(value <= tolerance) if passed is None else bool(passed),
    }


def _max_drift(series: pd.DataFrame) -> float:
    return MomentMetrics.calculate_max_mass_drift(series)


def smoluchowski_constant_case(settings: OracleSettings) -> List[Dict]:
    model = _model(
        {"form": "constant", "c": 1.0},
        {"form": "one"},
        {"form": "power_law"},
        settings.n,
    )
    result = _simulate(model, settings)
    series = result.series.to_frame()
    exact_m0 = smoluchowski_constant_m0(settings.t_end)
    m0_error = abs(series["M0"].iloc[-1] - exact_m0) / exact_m0
    exact = smoluchowski_constant_cell_counts(result.final.grid, settings.t_end)
    l1_error = DensityMetrics.relative_l1_error(result.final, exact)
    return [
        _row("smoluchowski_constant", "m0_relative_error", m0_error, 1e-2),
        _row("smoluchowski_constant", "l1_relative_error", l1_error, 2e-2),
        _row("smoluchowski_constant", "max_mass_drift", _max_drift(series), 1e-6),
    ]


def pure_binary_exchange_case(settings: OracleSettings) -> List[Dict]:
    model = _model(
        {"form": "product_sum", "alpha": 0.3, "beta": 0.7},
        {"form": "zero"},
        {"form": "power_law", "nu": 0.0},
        settings.n,
    )
    series = _simulate(model, settings).series.to_frame()
    m0 = series["M0"].to_numpy()
    m0_drift = float(np.max(np.abs(m0 / m0[0] - 1.0)))
    return [
        _row("pure_binary_exchange", "max_m0_drift", m0_drift, 1e-8),
        _row("pure_binary_exchange", "max_mass_drift", _max_drift(series), 1e-8),
    ]


def collisional_breakage_growth_case(settings: OracleSettings) -> List[Dict]:
    model = _model(
        {"form": "product_sum", "alpha": 0.3, "beta": 0.7},
        {"form": "zero"},
        {"form": "power_law", "nu": -0.5},
        settings.n,
    )
    series = _simulate(model, settings).series.to_frame()
    steps = np.diff(series["M0"].to_numpy())
    largest_decrease = float(max(0.0, -np.min(steps, initial=0.0)))
    return [
        _row(
            "collisional_breakage_growth",
            "m0_nondecreasing",
            largest_decrease,
            1e-12,
            MomentMetrics.is_monotone(series, "M0", "nondecreasing"),
        ),
        _row("collisional_breakage_growth", "max_mass_drift", _max_drift(series), 1e-6),
    ]


def reduction_consistency_case(settings: OracleSettings) -> List[Dict]:
    model = _model(
        {"form": "product_sum", "alpha": 0.3, "beta": 0.7},
        {"form": "one"},
        {"form": "power_law", "nu": -0.5},
        settings.n,
    )
    full = _simulate(model, settings, include_breakage=True).final
    reduced = _simulate(model, settings, include_breakage=False).final
    difference = float(np.max(np.abs(full.values - reduced.values)))
    tiny = float(np.finfo(float).tiny)
    return [
        _row(
            "reduction_consistency",
            "max_state_difference",
            difference,
            tiny,
            difference == 0.0,
        )
    ]


def brute_force_small_grid_case(settings: OracleSettings) -> List[Dict]:
    rng = np.random.default_rng(settings.seed)
    models = [
        _model(
            {"form": "product_sum", "alpha": 0.3, "beta": 0.7},
            {"form": "volume_ratio", "e_min": 0.2, "e_max": 0.9},
            {"form": "power_law", "nu": -0.5},
            1.0,
        ),
        _model(
            {"form": "constant", "c": 1.0},
            {"form": "constant", "e0": 0.5},
            {"form": "power_law"},
            1.0,
        ),
    ]
    grids = [
        build_grid(0.01, 1.0, 5, "geometric"),
        build_grid(0.05, 1.0, 4, "uniform"),
    ]
    caches: Dict[Tuple[int, int], Dict] = {}
    worst = 0.0
    for index in range(settings.brute_force_states):
        key = (index % len(models), (index // len(models)) % len(grids))
        model, grid = models[key[0]], grids[key[1]]
        ws = OperatorWorkspace.build(
            grid, model.kernel, model.probability, model.distribution
        )
        g = NumberDensity(grid, rng.uniform(0.0, 1.0, grid.size))
        terms = brute_force_terms(g, model, fragment_cache=caches.setdefault(key, {}))
        scale = float(
            np.max(
                terms["coagulation_gain"]
                + terms["collision_loss"]
                + terms["breakage_gain"]
            )
        )
        candidates = {
            "coagulation_gain": ws.coagulation_gain_values(g.values),
            "collision_loss": ws.collision_loss_values(g.values),
            "breakage_gain": ws.breakage_gain_values(g.values),
        }
        for name, values in candidates.items():
            worst = max(worst, relative_discrepancy(values, terms[name], scale))
        reference_rhs = (
            terms["coagulation_gain"] - terms["collision_loss"] + terms["breakage_gain"]
        )
        rhs = ws.rhs_values(g.values)
        worst = max(worst, relative_discrepancy(rhs, reference_rhs, scale))
    return [_row("brute_force_small_grid", "max_relative_discrepancy", worst, 1e-12)]


ORACLE_CASES: List[OracleCase] = [
    OracleCase(
        "smoluchowski_constant",
        "AnalyticClosedForm",
        2e-2,
        smoluchowski_constant_case,
    ),
    OracleCase(
        "pure_binary_exchange",
        "RefinedSelfConvergence",
        1e-8,
        pure_binary_exchange_case,
    ),
    OracleCase(
        "collisional_breakage_growth",
        "RefinedSelfConvergence",
        1e-6,
        collisional_breakage_growth_case,
    ),
    OracleCase(
        "reduction_consistency",
        "RefinedSelfConvergence",
        1e-300,
        reduction_consistency_case,
    ),
    OracleCase(
        "brute_force_small_grid",
        "BruteForceSmallGrid",
        1e-12,
        brute_force_small_grid_case,
    ),
]


def run_oracle_suite(
    settings: Optional[OracleSettings] = None,
    cases: Optional[List[str]] = None,
    threads: int = 1,
) -> pd.DataFrame:
    """
    Run the selected oracle cases, one per worker thread.

    Returns:
        DataFrame with columns case, reference, metric, value, tolerance, passed
    """
    settings = settings or OracleSettings()
    selected = [case for case in ORACLE_CASES if cases is None or case.name in cases]
    unknown = set(cases or []) - {case.name for case in ORACLE_CASES}
    if unknown:
        raise ValueError(f"unknown oracle cases: {sorted(unknown)}")

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        futures = [(case, pool.submit(case.evaluate, settings)) for case in selected]
        rows = []
        for case, future in futures:
            for row in future.result():
                rows.append({"reference": case.reference, **row})
                status = "PASS" if row["passed"] else "FAIL"
                logger.info(
                    f"{status} {row['case']}.{row['metric']} = {row['value']:.3e} "
                    f"(tolerance {row['tolerance']:.1e})"
                )
    columns = ["case", "reference", "metric", "value", "tolerance", "passed"]
    return pd.DataFrame(rows, columns=columns)
