"""
Breakup distributions

P(z | z1; z2) is the expected number density of fragments of volume z produced
when a colliding pair (z1, z2) breaks up. Every distribution satisfies

    P(z | z1; z2) = P(z | z2; z1) >= 0,    P = 0 for z > z1 + z2,
    int_0^{z1+z2} P dz = N,                int_0^{z1+z2} z P dz = z1 + z2.

Two families:
    - PowerLaw(nu): P = (nu + 2) z^nu / (z1 + z2)^(nu + 1), -1 < nu <= 0,
      N = (nu + 2) / (nu + 1); nu = 0 is binary breakage.
    - Tabulated: a histogram density q(u) on u = z / (z1 + z2) in [0, 1] with
      int q du = N and int u q du = 1, so P = q(z / s) / s.

Besides pointwise evaluation, every distribution exposes analytic segment
moments (fragment count and fragment mass on [a, b]) which the discrete
operators integrate against; point sampling is never used near the z -> 0
singularity of nu < 0.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import integrate

from ..utils.exceptions import DomainError, UnsupportedRegimeError
from .collision_kernel import ArrayLike, _unwrap, as_positive_volumes

MASS_IDENTITY_TOLERANCE = 1e-8


class BreakupDistribution(ABC):
    form: str = ""

    def __init__(self, parameters: Optional[Dict[str, Any]] = None):
        self.parameters = dict(parameters or {})

    @abstractmethod
    def fragment_count(self) -> float:
        """Expected number N of fragments per breakage event"""

    @abstractmethod
    def _density(self, z: np.ndarray, parent_volume: np.ndarray) -> np.ndarray:
        """P on 0 < z <= parent_volume"""

    @abstractmethod
    def segment_moments(
        self, a: ArrayLike, b: ArrayLike, parent_volume: float
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Fragment count and fragment mass on [a, b] for parents of total volume s.

        Args:
            a, b: Segment bounds, 0 <= a <= b; parts above s contribute nothing
            parent_volume: s = z1 + z2

        Returns:
            (count, mass) arrays shaped like a and b
        """

    def evaluate(self, z: ArrayLike, z1: ArrayLike, z2: ArrayLike) -> ArrayLike:
        volumes = as_positive_volumes(z=z, z1=z1, z2=z2)
        z = volumes["z"]
        parent_volume = volumes["z1"] + volumes["z2"]
        inside = z <= parent_volume
        safe_z = np.where(inside, z, parent_volume)
        return _unwrap(np.where(inside, self._density(safe_z, parent_volume), 0.0))

    def quadrature_moments(self, z1: float, z2: float) -> Tuple[float, float]:
        """Adaptive-quadrature count and mass integrals of P over (0, z1 + z2)"""
        as_positive_volumes(z1=z1, z2=z2)
        parent_volume = float(z1) + float(z2)
        count, _ = integrate.quad(
            lambda z: self.evaluate(z, z1, z2), 0.0, parent_volume,
            epsabs=0.0, epsrel=1e-12, limit=200,
        )
        mass, _ = integrate.quad(
            lambda z: z * self.evaluate(z, z1, z2), 0.0, parent_volume,
            epsabs=0.0, epsrel=1e-12, limit=200,
        )
        return count, mass

    def describe(self) -> str:
        params = ", ".join(f"{key}={value}" for key, value in self.parameters.items())
        return f"{self.form}({params}; N={self.fragment_count():g})"


class PowerLawDistribution(BreakupDistribution):
    form = "power_law"

    def __init__(self, parameters: Optional[Dict[str, Any]] = None):
        parameters = dict(parameters or {})
        parameters.setdefault("nu", 0.0)
        super().__init__(parameters)
        self.nu = float(self.parameters["nu"])
        self.validate_parameters()

    def validate_parameters(self) -> bool:
        if self.nu == -1.0:
            raise UnsupportedRegimeError(
                "unsupported-regime: nu = -1 produces an infinite number "
                "of daughter particles"
            )
        if self.nu < -1.0:
            raise UnsupportedRegimeError(
                f"unsupported-regime: nu = {self.nu} gives an infeasible fragment count"
            )
        if self.nu > 0.0:
            raise DomainError(f"nu must satisfy -1 < nu <= 0, got {self.nu}")
        return True

    def fragment_count(self) -> float:
        return (self.nu + 2.0) / (self.nu + 1.0)

    def _density(self, z: np.ndarray, parent_volume: np.ndarray) -> np.ndarray:
        return (self.nu + 2.0) * z**self.nu / parent_volume ** (self.nu + 1.0)

    def segment_moments(self, a, b, parent_volume):
        s = float(parent_volume)
        lower = np.clip(np.asarray(a, dtype=float), 0.0, s) / s
        upper = np.clip(np.asarray(b, dtype=float), 0.0, s) / s
        upper = np.maximum(upper, lower)
        exponent = self.nu + 1.0
        count = self.fragment_count() * (upper**exponent - lower**exponent)
        mass = s * (upper ** (self.nu + 2.0) - lower ** (self.nu + 2.0))
        return count, mass

    def quadrature_moments(self, z1: float, z2: float) -> Tuple[float, float]:
        # algebraic weight z^nu handles the endpoint singularity exactly
        as_positive_volumes(z1=z1, z2=z2)
        parent_volume = float(z1) + float(z2)
        scale = (self.nu + 2.0) / parent_volume ** (self.nu + 1.0)
        count, _ = integrate.quad(
            lambda z: scale, 0.0, parent_volume, weight="alg", wvar=(self.nu, 0.0)
        )
        mass, _ = integrate.quad(
            lambda z: scale, 0.0, parent_volume, weight="alg", wvar=(self.nu + 1.0, 0.0)
        )
        return count, mass


class TabulatedDistribution(BreakupDistribution):
    """
    Histogram density q(u) on bins of the normalized fragment volume u = z / s.

    Args:
        u_edges: Bin edges, strictly increasing from 0 to 1
        q: Density value on each bin (len(u_edges) - 1 entries), nonnegative

    Raises:
        DomainError: If the bins are malformed or the mass identity int u q du = 1 fails
    """

    form = "tabulated"

    def __init__(self, u_edges, q, parameters: Optional[Dict[str, Any]] = None):
        super().__init__(parameters)
        self.u_edges = np.asarray(u_edges, dtype=float)
        self.q = np.asarray(q, dtype=float)
        self.validate_parameters()
        widths = np.diff(self.u_edges)
        self._cum_count = np.concatenate([[0.0], np.cumsum(self.q * widths)])
        self._cum_mass = np.concatenate(
            [
                [0.0],
                np.cumsum(
                    self.q * (self.u_edges[1:] ** 2 - self.u_edges[:-1] ** 2) / 2.0
                ),
            ]
        )

    @classmethod
    def from_csv(cls, path: str) -> "TabulatedDistribution":
        """Read a table with columns u_lo, u_hi, q (comment lines start with #)"""
        table = pd.read_csv(path, comment="#", float_precision="round_trip")
        missing = {"u_lo", "u_hi", "q"} - set(table.columns)
        if missing:
            raise DomainError(
                f"tabulated distribution {path} lacks columns {sorted(missing)}"
            )
        edges = np.concatenate([table["u_lo"].to_numpy()[:1], table["u_hi"].to_numpy()])
        if not np.allclose(table["u_lo"].to_numpy()[1:], table["u_hi"].to_numpy()[:-1]):
            raise DomainError("tabulated distribution bins must be contiguous")
        return cls(edges, table["q"].to_numpy(), parameters={"path": path})

    def validate_parameters(self) -> bool:
        edges, q = self.u_edges, self.q
        if edges.ndim != 1 or len(edges) < 2 or len(q) != len(edges) - 1:
            raise DomainError(
                "tabulated distribution needs len(q) == len(u_edges) - 1 >= 1"
            )
        if edges[0] != 0.0 or edges[-1] != 1.0 or np.any(np.diff(edges) <= 0):
            raise DomainError("u_edges must increase strictly from 0 to 1")
        if np.any(q < 0) or np.any(~np.isfinite(q)):
            raise DomainError("q must be finite and nonnegative")
        mass = float(np.sum(q * (edges[1:] ** 2 - edges[:-1] ** 2) / 2.0))
        if abs(mass - 1.0) > MASS_IDENTITY_TOLERANCE:
            raise DomainError(
                f"tabulated q violates the mass identity: int u q du = {mass}"
            )
        return True

    def fragment_count(self) -> float:
        return float(self._cum_count[-1])

    def _bin_of(self, u: np.ndarray) -> np.ndarray:
        index = np.searchsorted(self.u_edges, u, side="right") - 1
        return np.clip(index, 0, len(self.q) - 1)

    def _cumulative(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        index = self._bin_of(u)
        lower = self.u_edges[index]
        count = self._cum_count[index] + self.q[index] * (u - lower)
        mass = self._cum_mass[index] + self.q[index] * (u**2 - lower**2) / 2.0
        return count, mass

    def _density(self, z: np.ndarray, parent_volume: np.ndarray) -> np.ndarray:
        u = z / parent_volume
        return self.q[self._bin_of(u)] / parent_volume

    def segment_moments(self, a, b, parent_volume):
        s = float(parent_volume)
        lower = np.clip(np.asarray(a, dtype=float), 0.0, s) / s
        upper = np.maximum(np.clip(np.asarray(b, dtype=float), 0.0, s) / s, lower)
        count_lo, mass_lo = self._cumulative(lower)
        count_hi, mass_hi = self._cumulative(upper)
        return count_hi - count_lo, s * (mass_hi - mass_lo)

    def quadrature_moments(self, z1: float, z2: float) -> Tuple[float, float]:
        as_positive_volumes(z1=z1, z2=z2)
        parent_volume = float(z1) + float(z2)
        breakpoints = self.u_edges[1:-1] * parent_volume
        count = 0.0
        mass = 0.0
        bounds = np.concatenate([[0.0], breakpoints, [parent_volume]])
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            mid = 0.5 * (lo + hi)
            density = float(self.evaluate(mid, z1, z2))
            count += integrate.quad(lambda z: density, lo, hi)[0]
            mass += integrate.quad(lambda z: z * density, lo, hi)[0]
        return count, mass


def eval_P(
    dist: BreakupDistribution, z: ArrayLike, z1: ArrayLike, z2: ArrayLike
) -> ArrayLike:
    return dist.evaluate(z, z1, z2)


def fragment_count(dist: BreakupDistribution) -> float:
    return dist.fragment_count()
