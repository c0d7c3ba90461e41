"""
Collision kernels

A collision kernel Phi(z, z1) gives the rate at which particles of volumes z and
z1 collide. Two families are supported:
    - ProductSum: Phi(z, z1) = k1 (z^alpha z1^beta + z1^alpha z^beta)
    - Constant:   Phi(z, z1) = c

Every kernel carries a truncation parameter n. The truncated kernel
Phi_n(z, z1) = Phi(z, z1) * 1[z + z1 < n] is what the finite-domain solver uses;
with n = inf it coincides with Phi.

Example:
    kernel = ProductSumKernel({"k1": 1.0, "alpha": 0.3, "beta": 0.7}, truncation_n=50)
    kernel.evaluate(1.0, 1.0)            # 2.0
    kernel.evaluate_truncated(30.0, 25.0)  # 0.0
"""

import math
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Union

import numpy as np

from ..utils.exceptions import DomainError

ArrayLike = Union[float, np.ndarray]


def as_positive_volumes(**volumes: ArrayLike) -> Dict[str, np.ndarray]:
    """Convert volumes to float arrays; DomainError for nonpositive or nonfinite ones"""
    converted = {}
    for name, value in volumes.items():
        array = np.asarray(value, dtype=float)
        if np.any(~np.isfinite(array)) or np.any(array <= 0):
            raise DomainError(f"{name} must be a positive finite volume, got {value!r}")
        converted[name] = array
    return converted


def _unwrap(result: np.ndarray) -> ArrayLike:
    return float(result) if result.ndim == 0 else result


class CollisionKernel(ABC):
    """Base class of all collision kernels"""

    form: str = ""

    def __init__(
        self,
        parameters: Optional[Dict[str, Any]] = None,
        truncation_n: float = math.inf,
    ):
        self.parameters = dict(parameters or {})
        truncation_n = float(truncation_n)
        if not truncation_n > 0:
            raise DomainError(f"truncation_n must be positive, got {truncation_n}")
        self.truncation_n = truncation_n

    @abstractmethod
    def _rate(self, z: np.ndarray, z1: np.ndarray) -> np.ndarray:
        """Untruncated rate on validated arrays"""

    @abstractmethod
    def gamma2_constants(self) -> Dict[str, float]:
        """Return k1, alpha, beta of the kernel written in product-sum form"""

    def evaluate(self, z: ArrayLike, z1: ArrayLike) -> ArrayLike:
        volumes = as_positive_volumes(z=z, z1=z1)
        return _unwrap(self._rate(volumes["z"], volumes["z1"]))

    def evaluate_truncated(self, z: ArrayLike, z1: ArrayLike) -> ArrayLike:
        volumes = as_positive_volumes(z=z, z1=z1)
        z, z1 = volumes["z"], volumes["z1"]
        rate = self._rate(z, z1)
        if math.isinf(self.truncation_n):
            return _unwrap(rate)
        return _unwrap(np.where(z + z1 < self.truncation_n, rate, 0.0))

    def is_gamma2_compliant(self) -> bool:
        """True iff the kernel is product-sum with 0 < alpha <= beta < 1 and k1 >= 0"""
        constants = self.gamma2_constants()
        return (
            self.form == ProductSumKernel.form
            and constants["k1"] >= 0
            and 0 < constants["alpha"] <= constants["beta"] < 1
        )

    def with_truncation(self, truncation_n: float) -> "CollisionKernel":
        return type(self)(self.parameters, truncation_n=truncation_n)

    def describe(self) -> str:
        params = ", ".join(f"{key}={value:g}" for key, value in self.parameters.items())
        return f"{self.form}({params}; n={self.truncation_n:g})"


class ProductSumKernel(CollisionKernel):
    form = "product_sum"

    def __init__(
        self,
        parameters: Optional[Dict[str, Any]] = None,
        truncation_n: float = math.inf,
    ):
        parameters = dict(parameters or {})
        parameters.setdefault("k1", 1.0)
        super().__init__(parameters, truncation_n)
        self.k1 = float(self.parameters["k1"])
        self.alpha = float(self.parameters["alpha"])
        self.beta = float(self.parameters["beta"])
        if self.k1 < 0:
            raise DomainError("k1 must be nonnegative")
        if self.alpha < 0 or self.beta < 0:
            raise DomainError("alpha and beta must be nonnegative")

    def _rate(self, z: np.ndarray, z1: np.ndarray) -> np.ndarray:
        # both products appear in both argument orders, so swapping z and z1 is exact
        return self.k1 * (z**self.alpha * z1**self.beta + z1**self.alpha * z**self.beta)

    def gamma2_constants(self) -> Dict[str, float]:
        return {"k1": self.k1, "alpha": self.alpha, "beta": self.beta}


class ConstantKernel(CollisionKernel):
    form = "constant"

    def __init__(
        self,
        parameters: Optional[Dict[str, Any]] = None,
        truncation_n: float = math.inf,
    ):
        parameters = dict(parameters or {})
        parameters.setdefault("c", 1.0)
        super().__init__(parameters, truncation_n)
        self.c = float(self.parameters["c"])
        if self.c < 0:
            raise DomainError("c must be nonnegative")

    def _rate(self, z: np.ndarray, z1: np.ndarray) -> np.ndarray:
        return np.full(np.broadcast(z, z1).shape, self.c)

    def gamma2_constants(self) -> Dict[str, float]:
        # c = k1 (z^0 z1^0 + z1^0 z^0)
        return {"k1": self.c / 2.0, "alpha": 0.0, "beta": 0.0}


def eval_phi(kernel: CollisionKernel, z: ArrayLike, z1: ArrayLike) -> ArrayLike:
    return kernel.evaluate(z, z1)


def eval_phi_truncated(
    kernel: CollisionKernel, z: ArrayLike, z1: ArrayLike
) -> ArrayLike:
    return kernel.evaluate_truncated(z, z1)
