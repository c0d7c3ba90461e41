"""
Discrete collision operators on a fixed grid.

The semi-discrete system is dg/dt = C1(g) - B3(g) + B1(g) with
    C1  coagulation gain, pair (i, j) merges into a particle of volume p_i + p_j
    B3  collision loss, every collision removes both partners
    B1  collisional-breakage gain, a pair breaks into fragments with density P

Everything is expressed over unordered parent pairs i <= j with p_i + p_j < n.
A pair collides at rate w_ij K_ij g_i g_j width_i width_j (w_ij = 1/2 on the
diagonal), coalesces with probability E_ij and otherwise breaks up. Newborn
particles are placed with a fixed-pivot rule so that each event moves exactly
p_i + p_j of mass, which makes sum_k rhs_k p_k width_k vanish up to rounding.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import sparse

from src.model.breakup_distribution import BreakupDistribution
from src.model.coalescence_probability import CoalescenceProbability
from src.model.collision_kernel import CollisionKernel
from src.utils.exceptions import ContractViolation
from src.utils.logger import setup_logger

from .grid import NumberDensity, VolumeGrid

logger = setup_logger(__name__)

TRANSFER_TOLERANCE = 1e-14


def split_volume(grid: VolumeGrid, volume: float) -> Tuple[Tuple[int, float], ...]:
    """
    Fixed-pivot placement of one particle of the given volume.

    Returns (cell, count) entries that carry count 1 and mass `volume` when the
    volume lies between two pivots; above the last pivot the particle is
    represented by volume / p_last particles in the last cell, so only mass is kept.
    """
    pivots = grid.pivots
    if volume >= pivots[-1]:
        return ((grid.size - 1, volume / pivots[-1]),)
    if volume <= pivots[0]:
        return ((0, volume / pivots[0]),)
    k = int(np.searchsorted(pivots, volume, side="right") - 1)
    lower = (pivots[k + 1] - volume) / (pivots[k + 1] - pivots[k])
    return ((k, lower), (k + 1, 1.0 - lower))


def allocate_fragments(
    distribution: BreakupDistribution, grid: VolumeGrid, parent_volume: float
) -> np.ndarray:
    """
    Expected fragment counts per cell for one breakage event of total volume s.

    Only cells whose pivot does not exceed s receive fragments. The exact count
    and mass of P on each pivot segment [p_k, p_k+1] are split between the two
    pivots so both are kept; the pieces below the first pivot and above the top
    eligible pivot go to the end cells, and the resulting mass error is removed
    by moving count between cells. If that cannot close the gap the counts are
    rescaled so the mass identity holds and only the count identity is off.

    Returns:
        Array of counts c_k with sum_k c_k p_k = s
    """
    s = float(parent_volume)
    pivots = grid.pivots
    counts = np.zeros(grid.size)
    top = int(np.searchsorted(pivots, s, side="right") - 1)
    if top < 0:
        # s below the first pivot: the whole event sits in cell 0
        counts[0] = s / pivots[0]
        return counts

    count, _ = distribution.segment_moments(0.0, pivots[0], s)
    counts[0] += float(count)

    if top > 0:
        lo = pivots[:top]
        hi = pivots[1 : top + 1]
        seg_count, seg_mass = distribution.segment_moments(lo, hi, s)
        spacing = hi - lo
        lower_share = np.maximum((hi * seg_count - seg_mass) / spacing, 0.0)
        upper_share = np.maximum((seg_mass - lo * seg_count) / spacing, 0.0)
        counts[:top] += lower_share
        counts[1 : top + 1] += upper_share

    count, _ = distribution.segment_moments(pivots[top], s, s)
    counts[top] += float(count)

    excess = float(counts @ pivots) - s
    tolerance = TRANSFER_TOLERANCE * s
    if excess > tolerance:
        # move count down into cell 0
        for k in range(1, top + 1):
            gain = counts[k] * (pivots[k] - pivots[0])
            if gain <= 0:
                continue
            moved = counts[k] if gain <= excess else excess / (pivots[k] - pivots[0])
            counts[k] -= moved
            counts[0] += moved
            excess -= moved * (pivots[k] - pivots[0])
            if excess <= tolerance:
                break
    elif excess < -tolerance:
        # move count up into the top eligible cell
        for k in range(top - 1, -1, -1):
            gain = counts[k] * (pivots[top] - pivots[k])
            if gain <= 0:
                continue
            step = pivots[top] - pivots[k]
            moved = counts[k] if gain <= -excess else -excess / step
            counts[k] -= moved
            counts[top] += moved
            excess += moved * (pivots[top] - pivots[k])
            if excess >= -tolerance:
                break

    counts = np.maximum(counts, 0.0)
    counts *= s / float(counts @ pivots)
    return counts


@dataclass(frozen=True, eq=False)
class OperatorWorkspace:
    """
    Precomputed tables for one (grid, model) combination.

    Attributes:
        grid: Grid the tables were built on
        kernel_table: K[i, j], truncated kernel at pivot pairs, 0 where p_i + p_j >= n
        probability_table: E[i, j]
        pair_i, pair_j: Unordered parent pairs (i <= j) with nonzero K
        pair_weight: 1 off the diagonal, 1/2 on it
        pair_kernel, pair_probability: K and E per pair
        coagulation_map: Sparse (pairs x cells) fixed-pivot placement of the merger
        redistribution: Sparse (pairs x cells) fragment counts per breakage event,
            None if E == 1
        count_defect: |sum_k counts - N| / N per pair
    """

    grid: VolumeGrid
    kernel: CollisionKernel
    probability: CoalescenceProbability
    distribution: BreakupDistribution
    kernel_table: np.ndarray
    probability_table: np.ndarray
    pair_i: np.ndarray
    pair_j: np.ndarray
    pair_weight: np.ndarray
    pair_kernel: np.ndarray
    pair_probability: np.ndarray
    coagulation_map: sparse.csr_matrix
    redistribution: Optional[sparse.csr_matrix]
    count_defect: np.ndarray
    effective_n: float

    @classmethod
    def build(
        cls,
        grid: VolumeGrid,
        kernel: CollisionKernel,
        probability: CoalescenceProbability,
        distribution: BreakupDistribution,
        include_breakage: bool = True,
    ) -> "OperatorWorkspace":
        pivots = grid.pivots
        size = grid.size
        effective_n = min(kernel.truncation_n, grid.domain_max)

        zi, zj = np.meshgrid(pivots, pivots, indexing="ij")
        inside = zi + zj < effective_n
        kernel_table = np.where(inside, kernel.evaluate(zi, zj), 0.0)
        probability_table = np.asarray(probability.evaluate(zi, zj), dtype=float)

        upper = np.triu(np.ones((size, size), dtype=bool)) & (kernel_table > 0)
        pair_i, pair_j = np.nonzero(upper)
        pair_weight = np.where(pair_i == pair_j, 0.5, 1.0)
        pair_kernel = kernel_table[pair_i, pair_j]
        pair_probability = probability_table[pair_i, pair_j]
        parent_volume = pivots[pair_i] + pivots[pair_j]

        rows, cols, data = [], [], []
        for row, volume in enumerate(parent_volume):
            for cell, share in split_volume(grid, float(volume)):
                rows.append(row)
                cols.append(cell)
                data.append(share)
        coagulation_map = sparse.csr_matrix(
            (data, (rows, cols)), shape=(len(pair_i), size)
        )

        count_defect = np.zeros(len(pair_i))
        redistribution = None
        breakage_active = include_breakage and not np.all(pair_probability == 1.0)
        if breakage_active:
            redistribution, count_defect = cls._build_redistribution(
                grid, distribution, parent_volume
            )
            worst = float(count_defect.max()) if len(count_defect) else 0.0
            if worst > 1e-8:
                logger.info(
                    "Fragment count identity not representable on this grid for some "
                    f"pairs (max relative defect {worst:.3e}); mass identity kept"
                )

        logger.debug(
            f"Workspace built: {size} cells, {len(pair_i)} pairs, "
            f"breakage {'on' if breakage_active else 'off'}"
        )
        return cls(
            grid=grid,
            kernel=kernel,
            probability=probability,
            distribution=distribution,
            kernel_table=kernel_table,
            probability_table=probability_table,
            pair_i=pair_i,
            pair_j=pair_j,
            pair_weight=pair_weight,
            pair_kernel=pair_kernel,
            pair_probability=pair_probability,
            coagulation_map=coagulation_map,
            redistribution=redistribution,
            count_defect=count_defect,
            effective_n=float(effective_n),
        )

    @staticmethod
    def _build_redistribution(
        grid: VolumeGrid, distribution: BreakupDistribution, parent_volume: np.ndarray
    ) -> Tuple[sparse.csr_matrix, np.ndarray]:
        expected = distribution.fragment_count()
        cache: Dict[float, np.ndarray] = {}
        rows, cols, data = [], [], []
        defect = np.zeros(len(parent_volume))
        for row, volume in enumerate(parent_volume):
            key = float(volume)
            if key not in cache:
                cache[key] = allocate_fragments(distribution, grid, key)
            counts = cache[key]
            support = np.nonzero(counts)[0]
            rows.append(np.full(len(support), row))
            cols.append(support)
            data.append(counts[support])
            defect[row] = abs(float(counts.sum()) - expected) / expected
        table = sparse.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(len(parent_volume), grid.size),
        )
        return table, defect

    @property
    def breakage_enabled(self) -> bool:
        return self.redistribution is not None

    def check_state(self, g: NumberDensity) -> None:
        if not g.grid.same_as(self.grid):
            raise ContractViolation(
                "number density lives on a different grid than the workspace"
            )

    def pair_rates(self, values: np.ndarray) -> np.ndarray:
        """Collision rate of every parent pair"""
        weighted = values * self.grid.widths
        pair_mass = weighted[self.pair_i] * weighted[self.pair_j]
        return self.pair_weight * self.pair_kernel * pair_mass

    def coagulation_gain_values(
        self, values: np.ndarray, rates: Optional[np.ndarray] = None
    ) -> np.ndarray:
        rates = self.pair_rates(values) if rates is None else rates
        merged = self.coagulation_map.T @ (rates * self.pair_probability)
        return merged / self.grid.widths

    def collision_loss_values(self, values: np.ndarray) -> np.ndarray:
        return values * (self.kernel_table @ (values * self.grid.widths))

    def breakage_gain_values(
        self, values: np.ndarray, rates: Optional[np.ndarray] = None
    ) -> np.ndarray:
        if self.redistribution is None:
            return np.zeros(self.grid.size)
        rates = self.pair_rates(values) if rates is None else rates
        fragments = self.redistribution.T @ (rates * (1.0 - self.pair_probability))
        return fragments / self.grid.widths

    def rhs_values(self, values: np.ndarray) -> np.ndarray:
        rates = self.pair_rates(values)
        gain = self.coagulation_gain_values(values, rates)
        loss = self.collision_loss_values(values)
        fragments = self.breakage_gain_values(values, rates)
        return gain - loss + fragments

    def to_frames(self) -> Dict[str, pd.DataFrame]:
        """Kernel, probability and redistribution tables for inspection"""
        size = self.grid.size
        i, j = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
        pivots = self.grid.pivots
        kernel_frame = pd.DataFrame(
            {
                "i": i.ravel(),
                "j": j.ravel(),
                "pivot_i": pivots[i.ravel()],
                "pivot_j": pivots[j.ravel()],
                "K": self.kernel_table.ravel(),
            }
        )
        probability_frame = kernel_frame[["i", "j", "pivot_i", "pivot_j"]].copy()
        probability_frame["E"] = self.probability_table.ravel()

        if self.redistribution is not None:
            table = self.redistribution.tocoo()
            redistribution_frame = pd.DataFrame(
                {
                    "pair_i": self.pair_i[table.row],
                    "pair_j": self.pair_j[table.row],
                    "child": table.col,
                    "count": table.data,
                }
            ).sort_values(["pair_i", "pair_j", "child"], ignore_index=True)
        else:
            redistribution_frame = pd.DataFrame(
                columns=["pair_i", "pair_j", "child", "count"]
            )
        return {
            "kernel": kernel_frame,
            "probability": probability_frame,
            "redistribution": redistribution_frame,
        }


def coagulation_gain(g: NumberDensity, ws: OperatorWorkspace) -> np.ndarray:
    ws.check_state(g)
    return ws.coagulation_gain_values(g.values)


def collision_loss(g: NumberDensity, ws: OperatorWorkspace) -> np.ndarray:
    ws.check_state(g)
    return ws.collision_loss_values(g.values)


def breakage_gain(g: NumberDensity, ws: OperatorWorkspace) -> np.ndarray:
    ws.check_state(g)
    return ws.breakage_gain_values(g.values)


def rhs(g: NumberDensity, ws: OperatorWorkspace) -> np.ndarray:
    """dg/dt = C1(g) - B3(g) + B1(g), cellwise"""
    ws.check_state(g)
    return ws.rhs_values(g.values)
