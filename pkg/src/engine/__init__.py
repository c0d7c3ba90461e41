from .grid import (
    NumberDensity,
    VolumeGrid,
    build_grid,
    moment,
    project_initial,
    weighted_norm,
)
from .integrator import (
    MomentSeries,
    RunResult,
    StepReport,
    TimeStepperConfig,
    run,
    step,
)
from .operators import (
    OperatorWorkspace,
    breakage_gain,
    coagulation_gain,
    collision_loss,
    rhs,
)

__all__ = [
    "NumberDensity",
    "VolumeGrid",
    "build_grid",
    "moment",
    "project_initial",
    "weighted_norm",
    "MomentSeries",
    "RunResult",
    "StepReport",
    "TimeStepperConfig",
    "run",
    "step",
    "OperatorWorkspace",
    "breakage_gain",
    "coagulation_gain",
    "collision_loss",
    "rhs",
]
