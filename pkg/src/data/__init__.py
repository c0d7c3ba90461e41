from .initial_conditions import (
    ExponentialInitial,
    InitialCondition,
    MonodisperseInitial,
    TabulatedInitial,
    UniformInitial,
    create_initial_condition,
)
from .snapshot_store import SnapshotStore

__all__ = [
    "ExponentialInitial",
    "InitialCondition",
    "MonodisperseInitial",
    "TabulatedInitial",
    "UniformInitial",
    "create_initial_condition",
    "SnapshotStore",
]
