from typing import Dict, List, Optional

import numpy as np
from scipy import integrate

from src.engine.grid import NumberDensity
from src.model.breakup_distribution import BreakupDistribution, eval_P, fragment_count
from src.model.model_factory import CollisionModel
from src.utils.exceptions import ContractViolation

MAX_CELLS = 5
TRANSFER_TOLERANCE = 1e-14


def _bracket(pivots: np.ndarray, volume: float) -> Dict[int, float]:
    last = len(pivots) - 1
    if volume >= pivots[last]:
        return {last: volume / pivots[last]}
    if volume <= pivots[0]:
        return {0: volume / pivots[0]}
    for k in range(last):
        if pivots[k] <= volume < pivots[k + 1]:
            lower = (pivots[k + 1] - volume) / (pivots[k + 1] - pivots[k])
            return {k: lower, k + 1: 1.0 - lower}
    raise ContractViolation(f"volume {volume} not bracketed by the pivots")


def _breakpoints(
    distribution: BreakupDistribution, s: float, a: float, b: float
) -> List[float]:
    # histogram densities jump at s * u_edges
    edges = getattr(distribution, "u_edges", None)
    if edges is None:
        return []
    return [float(s * u) for u in edges if a < s * u < b]


def _quad_moments(distribution: BreakupDistribution, s: float, a: float, b: float):
    """Count and mass of P(. | s/2; s/2) on [a, b] with a > 0, by adaptive quadrature"""
    if b <= a:
        return 0.0, 0.0
    points = _breakpoints(distribution, s, a, b) or None

    def density(z: float) -> float:
        return float(eval_P(distribution, z, 0.5 * s, 0.5 * s))

    options = {"epsabs": 0.0, "epsrel": 1e-13, "limit": 200, "points": points}
    count, _ = integrate.quad(density, a, b, **options)
    mass, _ = integrate.quad(lambda z: z * density(z), a, b, **options)
    return count, mass


def fragment_counts(
    distribution: BreakupDistribution, pivots: np.ndarray, s: float
) -> np.ndarray:
    """
    Fragment counts per cell for one breakage event of volume s, taken from P directly.

    Each pivot segment [p_k, p_k+1] below s is integrated by quadrature and its
    count and mass are shared between the two pivots so both are kept. The count
    below the first pivot (where P may be singular) is N minus everything above
    it and goes to cell 0; the piece between the top eligible pivot and s goes
    to that pivot. A remaining mass error is closed by moving count towards cell
    0 or the top cell, then by rescaling.
    """
    size = len(pivots)
    counts = np.zeros(size)
    top = -1
    for k in range(size):
        if pivots[k] <= s:
            top = k
    if top < 0:
        counts[0] = s / pivots[0]
        return counts

    above_first = 0.0
    for k in range(top):
        lo, hi = pivots[k], pivots[k + 1]
        count, mass = _quad_moments(distribution, s, lo, hi)
        above_first += count
        counts[k] += max((hi * count - mass) / (hi - lo), 0.0)
        counts[k + 1] += max((mass - lo * count) / (hi - lo), 0.0)
    count, _ = _quad_moments(distribution, s, pivots[top], s)
    above_first += count
    counts[top] += count
    counts[0] += fragment_count(distribution) - above_first

    excess = sum(counts[k] * pivots[k] for k in range(size)) - s
    tolerance = TRANSFER_TOLERANCE * s
    if excess > tolerance:
        for k in range(1, top + 1):
            step = pivots[k] - pivots[0]
            if counts[k] * step <= 0:
                continue
            moved = min(counts[k], excess / step)
            counts[k] -= moved
            counts[0] += moved
            excess -= moved * step
            if excess <= tolerance:
                break
    elif excess < -tolerance:
        for k in range(top - 1, -1, -1):
            step = pivots[top] - pivots[k]
            if counts[k] * step <= 0:
                continue
            moved = min(counts[k], -excess / step)
            counts[k] -= moved
            counts[top] += moved
            excess += moved * step
            if excess >= -tolerance:
                break

    counts = np.maximum(counts, 0.0)
    return counts * (s / sum(counts[k] * pivots[k] for k in range(size)))


def brute_force_terms(
    g: NumberDensity,
    model: CollisionModel,
    include_breakage: bool = True,
    fragment_cache: Optional[Dict[float, np.ndarray]] = None,
) -> Dict[str, np.ndarray]:
    """
    C1, B3 and B1 by direct loops over ordered pairs, no precomputed tables.

    Collisions with p_i + p_j >= n are skipped. The merged particle uses the
    fixed-pivot bracket rule and fragments are counted by `fragment_counts`
    from pointwise values of P, so the result must agree with the workspace
    operators up to quadrature and rounding error. Pass the same `fragment_cache`
    for repeated calls with one model and grid to skip the quadrature.

    Raises:
        ContractViolation: For grids with more than MAX_CELLS cells
    """
    grid = g.grid
    if grid.size > MAX_CELLS:
        raise ContractViolation(
            f"brute force is limited to {MAX_CELLS} cells, got {grid.size}"
        )
    pivots, widths, values = grid.pivots, grid.widths, g.values
    n = min(model.kernel.truncation_n, grid.domain_max)
    cache = {} if fragment_cache is None else fragment_cache

    gain = np.zeros(grid.size)
    loss = np.zeros(grid.size)
    fragments = np.zeros(grid.size)
    for i in range(grid.size):
        for j in range(grid.size):
            parent_volume = pivots[i] + pivots[j]
            if parent_volume >= n:
                continue
            phi = model.kernel.evaluate(pivots[i], pivots[j])
            e = model.probability.evaluate(pivots[i], pivots[j])
            rate = phi * values[i] * widths[i] * values[j] * widths[j]
            loss[i] += phi * values[i] * values[j] * widths[j]
            for k, share in _bracket(pivots, parent_volume).items():
                gain[k] += 0.5 * e * rate * share / widths[k]
            if include_breakage and e != 1.0:
                if parent_volume not in cache:
                    cache[parent_volume] = fragment_counts(
                        model.distribution, pivots, parent_volume
                    )
                counts = cache[parent_volume]
                for k in range(grid.size):
                    fragments[k] += 0.5 * (1.0 - e) * rate * counts[k] / widths[k]
    return {
        "coagulation_gain": gain,
        "collision_loss": loss,
        "breakage_gain": fragments,
    }


def brute_force_rhs(
    g: NumberDensity,
    model: CollisionModel,
    include_breakage: bool = True,
    fragment_cache: Optional[Dict[float, np.ndarray]] = None,
) -> np.ndarray:
    terms = brute_force_terms(g, model, include_breakage, fragment_cache)
    return terms["coagulation_gain"] - terms["collision_loss"] + terms["breakage_gain"]


def relative_discrepancy(
    candidate: np.ndarray, reference: np.ndarray, scale: float = 0.0
) -> float:
    """max |candidate - reference| relative to max(|reference|, scale)"""
    denominator = max(float(np.max(np.abs(reference), initial=0.0)), scale)
    difference = float(np.max(np.abs(np.asarray(candidate) - reference), initial=0.0))
    if denominator == 0.0:
        return difference
    return difference / denominator
