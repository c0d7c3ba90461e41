from typing import Dict, Optional

import numpy as np
import pandas as pd

from src.engine.grid import NumberDensity, moment


class MomentMetrics:
    """
    Diagnostics computed from a moment series frame (columns t, M0, M1, M2,
    norm_1plusz, mass_drift, dt) or from a single state.
    """

    @staticmethod
    def calculate_max_mass_drift(series: pd.DataFrame) -> float:
        """Largest |M1(t) - M1(0)| / M1(0) over the recorded times"""
        if series.empty:
            return 0.0
        return float(series["mass_drift"].abs().max())

    @staticmethod
    def is_monotone(
        series: pd.DataFrame, column: str, direction: str, rtol: float = 1e-12
    ) -> bool:
        """
        Check a moment column step by step.

        Args:
            direction: "nonincreasing", "nondecreasing" or "constant"
            rtol: Slack relative to the first value, absorbs rounding
        """
        values = series[column].to_numpy(dtype=float)
        if len(values) < 2:
            return True
        slack = rtol * max(abs(values[0]), np.finfo(float).tiny)
        steps = np.diff(values)
        if direction == "nonincreasing":
            return bool(np.all(steps <= slack))
        if direction == "nondecreasing":
            return bool(np.all(steps >= -slack))
        if direction == "constant":
            return bool(np.all(np.abs(values - values[0]) <= slack))
        raise ValueError(f"Unknown direction: {direction}")

    @staticmethod
    def check_mass_bound(series: pd.DataFrame, rtol: float = 1e-6) -> bool:
        """M1(t) <= M1(0) (1 + rtol) at every recorded time"""
        mass = series["M1"].to_numpy(dtype=float)
        return bool(np.all(mass <= mass[0] * (1.0 + rtol))) if len(mass) else True

    @staticmethod
    def fit_norm_growth(
        series: pd.DataFrame, tolerance: float = 0.05
    ) -> Dict[str, float]:
        """
        Fit log ||g|| = a + b t + c t^2 and flag growth faster than exponential.

        The quadratic term over the run, c * t_end^2, is the upward deviation of
        log ||g|| from the best exponential; above `tolerance` the growth is
        reported as super-exponential. A norm that shrinks over the run (negative
        rate and below its initial value at the end) is never flagged.
        """
        t = series["t"].to_numpy(dtype=float)
        norm = series["norm_1plusz"].to_numpy(dtype=float)
        result = {"rate": 0.0, "curvature": 0.0, "super_exponential": False}
        usable = norm > 0
        if np.count_nonzero(usable) < 3 or np.ptp(t[usable]) == 0:
            return result
        t, log_norm = t[usable], np.log(norm[usable])
        result["rate"] = float(np.polyfit(t, log_norm, 1)[0])
        curvature = float(np.polyfit(t, log_norm, 2)[0])
        result["curvature"] = curvature
        growing = result["rate"] > 0 or log_norm[-1] > log_norm[0]
        bent_upwards = curvature * t[-1] ** 2 > tolerance
        result["super_exponential"] = bool(growing and bent_upwards)
        return result

    @staticmethod
    def detect_mass_loss(
        series: pd.DataFrame, threshold: float = 1e-3
    ) -> Optional[float]:
        """First recorded time at which M1 fell more than `threshold` below M1(0)"""
        lost = series[series["mass_drift"] < -threshold]
        return None if lost.empty else float(lost["t"].iloc[0])

    @staticmethod
    def boundary_mass_fraction(g: NumberDensity) -> float:
        """Share of M1 held by cells with pivot above n / 2"""
        total = moment(g, 1)
        if total == 0:
            return 0.0
        grid = g.grid
        upper = grid.pivots > grid.domain_max / 2
        return float(np.sum((grid.pivots * g.values * grid.widths)[upper]) / total)

    @staticmethod
    def detect_gelation(
        snapshots: Dict[float, NumberDensity], threshold: float = 0.1
    ) -> Optional[float]:
        """
        First snapshot time at which more than `threshold` of M1 sits above n / 2.

        The truncated system conserves M1, so runaway growth shows up as mass
        piling against the truncation bound rather than as M1 decay.
        """
        for time in sorted(snapshots):
            if MomentMetrics.boundary_mass_fraction(snapshots[time]) > threshold:
                return float(time)
        return None
