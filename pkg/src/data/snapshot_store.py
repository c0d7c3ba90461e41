import os
from typing import Dict, Optional

import numpy as np
import pandas as pd

from ..utils.logger import setup_logger

logger = setup_logger(__name__)

SCHEMA_HEADER = "# collide-pbe v1"


class SnapshotStore:
    """
    Writes run outputs into one directory as versioned CSV files.

    Layout:
        moments.csv                 t, M0, M1, M2, norm_1plusz, mass_drift, dt
        snapshots/t<time>.csv       time, pivot, density
        report.txt / summary.txt    text reports
        any other named table       e.g. convergence.csv, kernel.csv

    Every CSV starts with the schema comment line "# collide-pbe v1".
    """

    def __init__(self, output_dir: str):
        self.output_dir = output_dir
        os.makedirs(os.path.join(output_dir, "snapshots"), exist_ok=True)

    def _path(self, *parts: str) -> str:
        return os.path.join(self.output_dir, *parts)

    @staticmethod
    def write_csv(frame: pd.DataFrame, path: str) -> str:
        try:
            with open(path, "w", encoding="utf-8", newline="") as handle:
                handle.write(SCHEMA_HEADER + "\n")
                frame.to_csv(handle, index=False, float_format="%.17g")
        except OSError as e:
            logger.error(f"Failed to write {path}: {str(e)}")
            raise
        return path

    @staticmethod
    def read_csv(path: str) -> pd.DataFrame:
        return pd.read_csv(path, comment="#", float_precision="round_trip")

    def save_moments(self, series: pd.DataFrame) -> str:
        return self.write_csv(series, self._path("moments.csv"))

    def save_snapshot(
        self,
        time: float,
        pivots: np.ndarray,
        values: np.ndarray,
        name: Optional[str] = None,
    ) -> str:
        frame = pd.DataFrame(
            {
                "time": np.full(len(pivots), float(time)),
                "pivot": pivots,
                "density": values,
            }
        )
        filename = name or f"t{time:.6g}.csv"
        return self.write_csv(frame, self._path("snapshots", filename))

    def save_state(
        self, state, name: Optional[str] = None, directory: Optional[str] = None
    ) -> str:
        """Write a NumberDensity; `directory` overrides the snapshots folder"""
        if directory is None:
            return self.save_snapshot(state.time, state.grid.pivots, state.values, name)
        frame = pd.DataFrame(
            {
                "time": np.full(state.grid.size, float(state.time)),
                "pivot": state.grid.pivots,
                "density": state.values,
            }
        )
        return self.write_csv(frame, self._path(directory, name or "state.csv"))

    def save_table(self, frame: pd.DataFrame, filename: str) -> str:
        return self.write_csv(frame, self._path(filename))

    def save_tables(self, frames: Dict[str, pd.DataFrame]) -> None:
        for name, frame in frames.items():
            self.save_table(frame, f"{name}.csv")

    def save_text(self, text: str, filename: str) -> str:
        path = self._path(filename)
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
        return path

    @staticmethod
    def load_snapshot(path: str) -> pd.DataFrame:
        """Read a snapshot CSV back; columns time, pivot, density"""
        frame = SnapshotStore.read_csv(path)
        missing = {"pivot", "density"} - set(frame.columns)
        if missing:
            raise ValueError(f"snapshot {path} lacks columns {sorted(missing)}")
        return frame
