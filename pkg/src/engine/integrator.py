"""
Explicit time integration of dg/dt = rhs(g) with step-doubling error control.

Every attempted step is taken once with dt and twice with dt/2; the difference,
scaled by 1 / (2^p - 1), estimates the local error of the half-step result,
which is the one kept. Negative cell values are clipped and the clipped mass is
accounted for; a step that would clip more than CLIP_BUDGET * M1 is rejected.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.utils.exceptions import ConfigError, StiffnessError
from src.utils.logger import setup_logger

from .grid import NumberDensity, moment, weighted_norm
from .operators import OperatorWorkspace

logger = setup_logger(__name__)

CLIP_BUDGET = 1e-10
MAX_GROWTH = 2.0
SAFETY = 0.9


@dataclass(frozen=True)
class ButcherTableau:
    name: str
    order: int
    a: Tuple[Tuple[float, ...], ...]
    b: Tuple[float, ...]


METHODS: Dict[str, ButcherTableau] = {
    "RK4": ButcherTableau(
        "RK4",
        4,
        ((), (0.5,), (0.0, 0.5), (0.0, 0.0, 1.0)),
        (1 / 6, 1 / 3, 1 / 3, 1 / 6),
    ),
    "Heun": ButcherTableau("Heun", 2, ((), (1.0,)), (0.5, 0.5)),
    "Euler": ButcherTableau("Euler", 1, ((),), (1.0,)),
}


@dataclass(frozen=True)
class TimeStepperConfig:
    method: str = "RK4"
    dt_init: float = 1e-2
    dt_min: float = 1e-12
    dt_max: float = 1.0
    rel_tol: float = 1e-6
    abs_tol: float = 1e-12
    t_end: float = 1.0
    snapshot_times: Tuple[float, ...] = ()
    adaptive: bool = True

    def __post_init__(self):
        errors = self.validate()
        if errors:
            raise ConfigError(errors)

    def validate(self) -> List[str]:
        errors = []
        if self.method not in METHODS:
            errors.append(
                f"time.method must be one of {list(METHODS)}, got {self.method!r}"
            )
        if not 0 < self.dt_min <= self.dt_init <= self.dt_max:
            errors.append(
                f"time steps must satisfy 0 < dt_min <= dt_init <= dt_max, got "
                f"dt_min={self.dt_min}, dt_init={self.dt_init}, dt_max={self.dt_max}"
            )
        if self.rel_tol <= 0 or self.abs_tol < 0:
            errors.append("time.rel_tol must be > 0 and time.abs_tol >= 0")
        if self.t_end < 0:
            errors.append(f"time.t_end must be >= 0, got {self.t_end}")
        if any(t < 0 or t > self.t_end for t in self.snapshot_times):
            errors.append("time.snapshots must lie within [0, t_end]")
        return errors

    @classmethod
    def from_dict(cls, block: Dict) -> "TimeStepperConfig":
        """Fill documented defaults from a `time` config block"""
        t_end = float(block.get("t_end", 1.0))
        default_dt = min(1e-2, t_end / 10) if t_end > 0 else 1e-2
        dt_init = float(block.get("dt_init", default_dt))
        snapshots = block.get("snapshots") or ()
        if isinstance(snapshots, (int, float)):
            snapshots = (snapshots,)
        return cls(
            method=str(block.get("method", "RK4")),
            dt_init=dt_init,
            dt_min=float(block.get("dt_min", min(1e-12, dt_init))),
            dt_max=float(block.get("dt_max", max(t_end, dt_init))),
            rel_tol=float(block.get("rel_tol", 1e-6)),
            abs_tol=float(block.get("abs_tol", 1e-12)),
            t_end=t_end,
            snapshot_times=tuple(sorted(float(t) for t in snapshots)),
            adaptive=bool(block.get("adaptive", True)),
        )


@dataclass
class StepReport:
    t: float
    dt_used: float
    mass_drift: float
    negativity_clips: int = 0
    rejected_steps: int = 0
    dt_next: float = 0.0
    clipped_mass: float = 0.0
    error_estimate: float = 0.0


@dataclass
class MomentSeries:
    """Moments recorded at t = 0 and after every accepted step"""

    rows: List[Dict[str, float]] = field(default_factory=list)

    COLUMNS = ("t", "M0", "M1", "M2", "norm_1plusz", "mass_drift", "dt")

    def record(self, g: NumberDensity, reference_mass: float, dt: float) -> None:
        mass = moment(g, 1)
        self.rows.append(
            {
                "t": g.time,
                "M0": moment(g, 0),
                "M1": mass,
                "M2": moment(g, 2),
                "norm_1plusz": weighted_norm(g),
                "mass_drift": relative_drift(mass, reference_mass),
                "dt": dt,
            }
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=list(self.COLUMNS))

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class RunResult:
    final: NumberDensity
    series: MomentSeries
    reports: List[StepReport]
    snapshots: Dict[float, NumberDensity]

    @property
    def rejected_steps(self) -> int:
        return sum(report.rejected_steps for report in self.reports)

    @property
    def negativity_clips(self) -> int:
        return sum(report.negativity_clips for report in self.reports)


def relative_drift(mass: float, reference_mass: float) -> float:
    if reference_mass == 0:
        return 0.0 if mass == 0 else float("inf")
    return (mass - reference_mass) / reference_mass


def _explicit_step(
    rhs: Callable[[np.ndarray], np.ndarray],
    values: np.ndarray,
    dt: float,
    tableau: ButcherTableau,
    first_stage: Optional[np.ndarray] = None,
) -> np.ndarray:
    stages: List[np.ndarray] = []
    for index, coefficients in enumerate(tableau.a):
        if index == 0:
            stages.append(rhs(values) if first_stage is None else first_stage)
            continue
        increment = sum(c * k for c, k in zip(coefficients, stages) if c != 0.0)
        stage_values = values + dt * increment
        stages.append(rhs(stage_values))
    return values + dt * sum(b * k for b, k in zip(tableau.b, stages))


def _error_norm(
    coarse: np.ndarray, fine: np.ndarray, order: int, cfg: TimeStepperConfig
) -> float:
    estimate = (fine - coarse) / (2.0**order - 1.0)
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(coarse), np.abs(fine))
    scale = np.where(scale > 0, scale, np.finfo(float).tiny)
    return float(np.max(np.abs(estimate) / scale)) if len(estimate) else 0.0


def _clip(values: np.ndarray, g: NumberDensity) -> Tuple[np.ndarray, int, float]:
    negative = values < 0
    if not np.any(negative):
        return values, 0, 0.0
    grid = g.grid
    cell_mass = grid.pivots[negative] * grid.widths[negative]
    clipped_mass = float(np.sum(-values[negative] * cell_mass))
    clips = int(np.count_nonzero(negative))
    return np.where(negative, 0.0, values), clips, clipped_mass


def step(
    g: NumberDensity,
    ws: OperatorWorkspace,
    cfg: TimeStepperConfig,
    dt: Optional[float] = None,
    reference_mass: Optional[float] = None,
) -> Tuple[NumberDensity, StepReport]:
    """
    Advance g by one accepted step.

    Args:
        g: Current state, nonnegative
        ws: Operator workspace on g's grid
        cfg: Stepper settings
        dt: Step to attempt first (defaults to cfg.dt_init)
        reference_mass: M1 the drift is measured against (defaults to M1(g))

    Returns:
        (new state, report); report.dt_used may be smaller than dt after rejections

    Raises:
        StiffnessError: If steps keep being rejected at dt_min
    """
    ws.check_state(g)
    tableau = METHODS[cfg.method]
    dt = cfg.dt_init if dt is None else float(dt)
    reference_mass = moment(g, 1) if reference_mass is None else reference_mass
    current_mass = moment(g, 1)
    first_stage = ws.rhs_values(g.values)
    rejected = 0

    while True:
        if cfg.adaptive:
            coarse = _explicit_step(ws.rhs_values, g.values, dt, tableau, first_stage)
            half = _explicit_step(ws.rhs_values, g.values, dt / 2, tableau, first_stage)
            fine = _explicit_step(ws.rhs_values, half, dt / 2, tableau)
            error = _error_norm(coarse, fine, tableau.order, cfg)
        else:
            fine = _explicit_step(ws.rhs_values, g.values, dt, tableau, first_stage)
            error = 0.0

        finite = bool(np.all(np.isfinite(fine)))
        clipped, clips, clipped_mass = _clip(fine, g) if finite else (fine, 0, 0.0)
        budget = CLIP_BUDGET * max(current_mass, np.finfo(float).tiny)
        over_budget = clipped_mass > budget

        if finite and error <= 1.0 and not over_budget:
            break

        rejected += 1
        reason = "nonfinite state" if not finite else (
            f"clipped mass {clipped_mass:.3e}" if over_budget else f"error {error:.3e}"
        )
        logger.debug(f"Rejected step at t={g.time:.6g} with dt={dt:.3e}: {reason}")
        if dt <= cfg.dt_min * (1 + 1e-12) or not cfg.adaptive:
            raise StiffnessError(
                f"step size underflow at t={g.time:.6g}: "
                f"dt={dt:.3e} <= dt_min={cfg.dt_min:.3e} "
                f"after {rejected} rejections ({reason})",
                state=g,
            )
        dt = max(dt / 2.0, cfg.dt_min)

    if clips:
        logger.warning(
            f"Clipped {clips} negative cells at t={g.time + dt:.6g}, "
            f"mass {clipped_mass:.3e}"
        )

    if cfg.adaptive:
        growth = MAX_GROWTH if error == 0 else min(
            MAX_GROWTH, SAFETY * error ** (-1.0 / (tableau.order + 1))
        )
        dt_next = float(np.clip(dt * growth, cfg.dt_min, cfg.dt_max))
    else:
        dt_next = dt

    new_state = NumberDensity(g.grid, clipped, g.time + dt, g.unresolved_mass)
    report = StepReport(
        t=new_state.time,
        dt_used=dt,
        mass_drift=relative_drift(moment(new_state, 1), reference_mass),
        negativity_clips=clips,
        rejected_steps=rejected,
        dt_next=dt_next,
        clipped_mass=clipped_mass,
        error_estimate=error,
    )
    logger.debug(
        f"Accepted t={report.t:.6g} dt={dt:.3e} err={error:.3e} "
        f"drift={report.mass_drift:.3e}"
    )
    return new_state, report


def run(
    g0: NumberDensity,
    ws: OperatorWorkspace,
    cfg: TimeStepperConfig,
    snapshot_times: Optional[Sequence[float]] = None,
) -> RunResult:
    """
    Integrate from g0.time to cfg.t_end.

    Moments are recorded at the start and after every accepted step. Snapshots
    are copies of the state at t = 0, at every snapshot time and at t_end; the
    step is shortened to land on each of them exactly.
    """
    ws.check_state(g0)
    requested = cfg.snapshot_times if snapshot_times is None else snapshot_times
    times = sorted(set(requested))
    targets = sorted({t for t in times if t > g0.time} | {cfg.t_end})
    reference_mass = moment(g0, 1)

    state = g0.copy()
    series = MomentSeries()
    series.record(state, reference_mass, 0.0)
    reports: List[StepReport] = []
    snapshots: Dict[float, NumberDensity] = {state.time: state.copy()}

    dt = min(cfg.dt_init, cfg.dt_max)
    for target in targets:
        while state.time < target:
            remaining = target - state.time
            landing = dt >= remaining * (1 - 1e-12)
            attempt = remaining if landing else dt
            try:
                new_state, report = step(state, ws, cfg, attempt, reference_mass)
            except StiffnessError as error:
                error.series = series
                error.reports = reports
                error.snapshots = snapshots
                raise
            if landing and report.dt_used == attempt:
                new_state.time = target
                report.t = target
            state = new_state
            reports.append(report)
            series.record(state, reference_mass, report.dt_used)
            # a clean landing step says nothing about the controller step
            if not (landing and report.rejected_steps == 0):
                dt = report.dt_next
        snapshots[target] = state.copy()

    return RunResult(final=state, series=series, reports=reports, snapshots=snapshots)
