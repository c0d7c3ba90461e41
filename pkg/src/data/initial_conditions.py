"""
Initial conditions g0(z)

Each family exposes the integrals the projection needs: the particle count
int_a^b g0 dz and the mass int_a^b z g0 dz over a cell. The base class uses
adaptive quadrature; families with closed forms override it.

Families:
    - exponential(number, scale): g0 = number / scale * exp(-z / scale)
    - uniform(a, b, number):      g0 = number / (b - a) on [a, b]
    - monodisperse(z0, amplitude): all `amplitude` particles at volume z0
    - tabulated(path):            cell densities read back from a snapshot CSV
"""

import math
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import numpy as np
from scipy import integrate

from ..utils.exceptions import DomainError


class InitialCondition(ABC):
    family: str = ""

    def __init__(self, parameters: Optional[Dict[str, Any]] = None):
        self.parameters = dict(parameters or {})

    @abstractmethod
    def density(self, z: np.ndarray) -> np.ndarray:
        """g0 evaluated pointwise"""

    def breakpoints(self):
        """Points where g0 is not smooth, handed to the quadrature"""
        return []

    def _quad(self, integrand, a: float, b: float) -> float:
        points = [p for p in self.breakpoints() if a < p < b]
        value, _ = integrate.quad(
            integrand, a, b, points=points or None, epsabs=0.0, epsrel=1e-12, limit=200
        )
        return value

    def number(self, a: float, b: float) -> float:
        return self._quad(lambda z: float(self.density(np.asarray(z))), a, b)

    def mass(self, a: float, b: float) -> float:
        return self._quad(lambda z: z * float(self.density(np.asarray(z))), a, b)

    def describe(self) -> str:
        params = ", ".join(f"{key}={value}" for key, value in self.parameters.items())
        return f"{self.family}({params})"


class ExponentialInitial(InitialCondition):
    family = "exponential"

    def __init__(self, parameters: Optional[Dict[str, Any]] = None):
        parameters = dict(parameters or {})
        parameters.setdefault("number", 1.0)
        parameters.setdefault("scale", 1.0)
        super().__init__(parameters)
        self.total = float(self.parameters["number"])
        self.scale = float(self.parameters["scale"])
        if self.scale <= 0 or self.total < 0:
            raise DomainError(
                "exponential initial condition needs scale > 0 and number >= 0"
            )

    def density(self, z):
        z = np.asarray(z, dtype=float)
        return self.total / self.scale * np.exp(-z / self.scale)

    def number(self, a: float, b: float) -> float:
        s = self.scale
        return -self.total * math.exp(-a / s) * math.expm1(-(b - a) / s)

    def mass(self, a: float, b: float) -> float:
        s = self.scale
        width = b - a
        return self.total * math.exp(-a / s) * (
            -(a + s) * math.expm1(-width / s) - width * math.exp(-width / s)
        )


class UniformInitial(InitialCondition):
    family = "uniform"

    def __init__(self, parameters: Optional[Dict[str, Any]] = None):
        parameters = dict(parameters or {})
        parameters.setdefault("number", 1.0)
        super().__init__(parameters)
        self.a = float(self.parameters["a"])
        self.b = float(self.parameters["b"])
        self.total = float(self.parameters["number"])
        if not 0 <= self.a < self.b:
            raise DomainError("uniform initial condition needs 0 <= a < b")

    def density(self, z):
        z = np.asarray(z, dtype=float)
        inside = (z >= self.a) & (z <= self.b)
        return np.where(inside, self.total / (self.b - self.a), 0.0)

    def _overlap(self, a: float, b: float):
        return max(a, self.a), min(b, self.b)

    def number(self, a: float, b: float) -> float:
        lo, hi = self._overlap(a, b)
        return self.total * (hi - lo) / (self.b - self.a) if hi > lo else 0.0

    def mass(self, a: float, b: float) -> float:
        lo, hi = self._overlap(a, b)
        if hi <= lo:
            return 0.0
        return self.total * (hi**2 - lo**2) / (2.0 * (self.b - self.a))


class MonodisperseInitial(InitialCondition):
    family = "monodisperse"

    def __init__(self, parameters: Optional[Dict[str, Any]] = None):
        parameters = dict(parameters or {})
        parameters.setdefault("amplitude", 1.0)
        super().__init__(parameters)
        self.z0 = float(self.parameters["z0"])
        self.amplitude = float(self.parameters["amplitude"])
        if self.z0 <= 0 or self.amplitude < 0:
            raise DomainError(
                "monodisperse initial condition needs z0 > 0 and amplitude >= 0"
            )

    def density(self, z):
        return np.zeros_like(np.asarray(z, dtype=float))

    def number(self, a: float, b: float) -> float:
        return self.amplitude if a <= self.z0 < b else 0.0

    def mass(self, a: float, b: float) -> float:
        return self.amplitude * self.z0 if a <= self.z0 < b else 0.0


class TabulatedInitial(InitialCondition):
    """
    Cell densities given at pivots, typically a snapshot written by a previous run.

    On a grid with the same pivots the values are taken over unchanged; on any
    other grid the density is interpolated linearly between pivots and set to
    zero outside them.
    """

    family = "tabulated"

    def __init__(self, pivots, densities, parameters: Optional[Dict[str, Any]] = None):
        super().__init__(parameters)
        self.pivots = np.asarray(pivots, dtype=float)
        self.densities = np.asarray(densities, dtype=float)
        if self.pivots.shape != self.densities.shape or self.pivots.ndim != 1:
            raise DomainError(
                "tabulated initial condition needs matching pivot/density columns"
            )
        if np.any(np.diff(self.pivots) <= 0) or np.any(self.pivots <= 0):
            raise DomainError(
                "tabulated pivots must be positive and strictly increasing"
            )
        if np.any(self.densities < 0) or np.any(~np.isfinite(self.densities)):
            raise DomainError("tabulated densities must be finite and nonnegative")

    @classmethod
    def from_csv(cls, path: str) -> "TabulatedInitial":
        from .snapshot_store import SnapshotStore

        snapshot = SnapshotStore.load_snapshot(path)
        return cls(
            snapshot["pivot"].to_numpy(),
            snapshot["density"].to_numpy(),
            {"path": path},
        )

    def matches(self, pivots: np.ndarray) -> bool:
        return self.pivots.shape == pivots.shape and np.allclose(
            self.pivots, pivots, rtol=1e-12, atol=0.0
        )

    def density(self, z):
        z = np.asarray(z, dtype=float)
        return np.interp(z, self.pivots, self.densities, left=0.0, right=0.0)

    def breakpoints(self):
        return list(self.pivots)


_FAMILIES = {
    "exponential": ExponentialInitial,
    "uniform": UniformInitial,
    "monodisperse": MonodisperseInitial,
}


def create_initial_condition(block: Dict[str, Any]) -> InitialCondition:
    """Build an initial condition from an `initial` config block"""
    params = {k: v for k, v in block.items() if k != "family"}
    family = block.get("family")
    if family == "tabulated":
        return TabulatedInitial.from_csv(params["path"])
    if family not in _FAMILIES:
        raise ValueError(
            f"Initial family '{family}' not found. "
            f"Available: {list(_FAMILIES) + ['tabulated']}"
        )
    return _FAMILIES[family](params)
