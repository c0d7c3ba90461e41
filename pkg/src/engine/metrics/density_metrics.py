import numpy as np

from src.engine.grid import NumberDensity
from src.utils.exceptions import ContractViolation


def _piecewise_values(g: NumberDensity, points: np.ndarray) -> np.ndarray:
    edges = g.grid.edges
    index = np.searchsorted(edges, points, side="right") - 1
    inside = (index >= 0) & (index < g.grid.size)
    return np.where(inside, g.values[np.clip(index, 0, g.grid.size - 1)], 0.0)


class DensityMetrics:
    """Distances between piecewise-constant densities and reference solutions"""

    @staticmethod
    def l1_distance(first: NumberDensity, second: NumberDensity) -> float:
        """
        int |g1 - g2| dz over the overlap (0, min(n1, n2)).

        Both states are piecewise constant on their own cells and zero outside
        them, so the integral is exact on the merged edge set.
        """
        upper = min(first.grid.domain_max, second.grid.domain_max)
        edges = np.union1d(first.grid.edges, second.grid.edges)
        edges = edges[edges <= upper]
        if len(edges) < 2:
            return 0.0
        midpoints = 0.5 * (edges[:-1] + edges[1:])
        first_values = _piecewise_values(first, midpoints)
        difference = first_values - _piecewise_values(second, midpoints)
        return float(np.sum(np.abs(difference) * np.diff(edges)))

    @staticmethod
    def relative_l1_error(g: NumberDensity, exact_counts: np.ndarray) -> float:
        """
        sum_i |g_i w_i - N_i| / sum_i N_i against exact per-cell particle counts N_i.
        """
        exact_counts = np.asarray(exact_counts, dtype=float)
        if exact_counts.shape != g.values.shape:
            raise ContractViolation("exact counts and state have different cell counts")
        total = float(np.sum(exact_counts))
        error = float(np.sum(np.abs(g.values * g.grid.widths - exact_counts)))
        return error / total if total > 0 else error
