"""
Coalescence probabilities

E(z, z1) is the probability that a collision between particles of volumes z and
z1 ends in coalescence; with probability 1 - E the pair breaks up instead.
All forms are symmetric and take values in [0, 1].
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import numpy as np

from ..utils.exceptions import DomainError
from .collision_kernel import ArrayLike, _unwrap, as_positive_volumes


class CoalescenceProbability(ABC):
    form: str = ""

    def __init__(self, parameters: Optional[Dict[str, Any]] = None):
        self.parameters = dict(parameters or {})

    @abstractmethod
    def _probability(self, z: np.ndarray, z1: np.ndarray) -> np.ndarray:
        pass

    def evaluate(self, z: ArrayLike, z1: ArrayLike) -> ArrayLike:
        volumes = as_positive_volumes(z=z, z1=z1)
        return _unwrap(self._probability(volumes["z"], volumes["z1"]))

    def describe(self) -> str:
        params = ", ".join(f"{key}={value:g}" for key, value in self.parameters.items())
        return f"{self.form}({params})"


class ConstantProbability(CoalescenceProbability):
    form = "constant"

    def __init__(self, parameters: Optional[Dict[str, Any]] = None):
        super().__init__(parameters)
        self.e0 = float(self.parameters["e0"])
        if not 0.0 <= self.e0 <= 1.0:
            raise DomainError(f"e0 must lie in [0, 1], got {self.e0}")

    def _probability(self, z: np.ndarray, z1: np.ndarray) -> np.ndarray:
        return np.full(np.broadcast(z, z1).shape, self.e0)


class AlwaysCoalesce(ConstantProbability):
    """E = 1: the model reduces to Smoluchowski coagulation"""

    form = "one"

    def __init__(self, parameters: Optional[Dict[str, Any]] = None):
        super().__init__({"e0": 1.0})


class NeverCoalesce(ConstantProbability):
    """E = 0: every collision ends in breakage"""

    form = "zero"

    def __init__(self, parameters: Optional[Dict[str, Any]] = None):
        super().__init__({"e0": 0.0})


class VolumeRatioProbability(CoalescenceProbability):
    """
    E(z, z1) = e_min + (e_max - e_min) * (min(z, z1) / max(z, z1)) ** exponent

    Equal-sized pairs coalesce with probability e_max, very unequal pairs tend
    to e_min.
    """

    form = "volume_ratio"

    def __init__(self, parameters: Optional[Dict[str, Any]] = None):
        parameters = dict(parameters or {})
        parameters.setdefault("e_min", 0.0)
        parameters.setdefault("e_max", 1.0)
        parameters.setdefault("exponent", 1.0)
        super().__init__(parameters)
        self.e_min = float(self.parameters["e_min"])
        self.e_max = float(self.parameters["e_max"])
        self.exponent = float(self.parameters["exponent"])
        if not (0.0 <= self.e_min <= 1.0 and 0.0 <= self.e_max <= 1.0):
            raise DomainError("e_min and e_max must lie in [0, 1]")
        if self.exponent < 0:
            raise DomainError("exponent must be nonnegative")

    def _probability(self, z: np.ndarray, z1: np.ndarray) -> np.ndarray:
        ratio = np.minimum(z, z1) / np.maximum(z, z1)
        return self.e_min + (self.e_max - self.e_min) * ratio**self.exponent
