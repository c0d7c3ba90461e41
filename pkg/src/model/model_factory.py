from dataclasses import dataclass
from typing import Any, Dict, Type

from .breakup_distribution import (
    BreakupDistribution,
    PowerLawDistribution,
    TabulatedDistribution,
)
from .coalescence_probability import (
    AlwaysCoalesce,
    CoalescenceProbability,
    ConstantProbability,
    NeverCoalesce,
    VolumeRatioProbability,
)
from .collision_kernel import CollisionKernel, ConstantKernel, ProductSumKernel


@dataclass(frozen=True)
class CollisionModel:
    """The three model components of one collision/coalescence/breakage system"""

    kernel: CollisionKernel
    probability: CoalescenceProbability
    distribution: BreakupDistribution

    def describe(self) -> str:
        return (
            f"kernel={self.kernel.describe()}, E={self.probability.describe()}, "
            f"P={self.distribution.describe()}"
        )


class ModelFactory:
    """
    Factory for kernels, coalescence probabilities and breakup distributions

    Attributes:
        _kernels, _probabilities, _distributions: Registries keyed by config form name
    """

    _kernels: Dict[str, Type[CollisionKernel]] = {
        "product_sum": ProductSumKernel,
        "constant": ConstantKernel,
    }

    _probabilities: Dict[str, Type[CoalescenceProbability]] = {
        "constant": ConstantProbability,
        "volume_ratio": VolumeRatioProbability,
        "one": AlwaysCoalesce,
        "zero": NeverCoalesce,
    }

    _distributions: Dict[str, Type[BreakupDistribution]] = {
        "power_law": PowerLawDistribution,
        "tabulated": TabulatedDistribution,
    }

    @classmethod
    def get_available_forms(cls) -> Dict[str, Dict[str, Dict]]:
        """
        Get the supported forms of each component with descriptions and parameters

        Parameters without a default are required.

        Returns:
            Dict[str, Dict[str, Dict]]: component -> form -> information
        """
        return {
            "kernel": {
                "product_sum": {
                    "name": "Product-sum kernel",
                    "description": "k1 (z^alpha z1^beta + z1^alpha z^beta)",
                    "parameters": {
                        "k1": {"type": "float", "default": 1.0, "min": 0.0},
                        "alpha": {"type": "float", "min": 0.0},
                        "beta": {"type": "float", "min": 0.0},
                    },
                },
                "constant": {
                    "name": "Constant kernel",
                    "description": "Phi = c, the analytic-solution oracle",
                    "parameters": {"c": {"type": "float", "default": 1.0, "min": 0.0}},
                },
            },
            "probability": {
                "constant": {
                    "name": "Constant coalescence probability",
                    "description": "E = e0",
                    "parameters": {"e0": {"type": "float", "min": 0.0, "max": 1.0}},
                },
                "volume_ratio": {
                    "name": "Volume-ratio coalescence probability",
                    "description": "E = e_min + (e_max - e_min) (min/max)^exponent",
                    "parameters": {
                        "e_min": {
                            "type": "float",
                            "default": 0.0,
                            "min": 0.0,
                            "max": 1.0,
                        },
                        "e_max": {
                            "type": "float",
                            "default": 1.0,
                            "min": 0.0,
                            "max": 1.0,
                        },
                        "exponent": {"type": "float", "default": 1.0, "min": 0.0},
                    },
                },
                "one": {
                    "name": "Pure coalescence",
                    "description": "E = 1, Smoluchowski coagulation",
                    "parameters": {},
                },
                "zero": {
                    "name": "Pure collisional breakage",
                    "description": "E = 0, every collision breaks up",
                    "parameters": {},
                },
            },
            "breakup": {
                "power_law": {
                    "name": "Power-law breakup",
                    "description": (
                        "(nu + 2) z^nu / (z1 + z2)^(nu + 1), N = (nu + 2)/(nu + 1)"
                    ),
                    "parameters": {
                        "nu": {"type": "float", "default": 0.0, "max": 0.0}
                    },
                },
                "tabulated": {
                    "name": "Tabulated breakup",
                    "description": "Histogram q(u) on u = z/(z1 + z2) read from CSV",
                    "parameters": {"path": {"type": "str"}},
                },
            },
        }

    @classmethod
    def _lookup(cls, registry: Dict[str, Type], component: str, form: str) -> Type:
        if form not in registry:
            raise ValueError(
                f"{component} form '{form}' not found. "
                f"Available forms: {list(registry.keys())}"
            )
        return registry[form]

    @classmethod
    def create_kernel(
        cls, form: str, parameters: Dict[str, Any], truncation_n: float
    ) -> CollisionKernel:
        kernel_class = cls._lookup(cls._kernels, "kernel", form)
        return kernel_class(parameters, truncation_n=truncation_n)

    @classmethod
    def create_probability(
        cls, form: str, parameters: Dict[str, Any]
    ) -> CoalescenceProbability:
        probability_class = cls._lookup(cls._probabilities, "probability", form)
        return probability_class(parameters)

    @classmethod
    def create_distribution(
        cls, form: str, parameters: Dict[str, Any]
    ) -> BreakupDistribution:
        distribution_class = cls._lookup(cls._distributions, "breakup", form)
        if distribution_class is TabulatedDistribution:
            return TabulatedDistribution.from_csv(parameters["path"])
        return distribution_class(parameters)

    @classmethod
    def create_model(
        cls,
        kernel: Dict[str, Any],
        probability: Dict[str, Any],
        breakup: Dict[str, Any],
        truncation_n: float,
    ) -> CollisionModel:
        """
        Build a CollisionModel from three parameter blocks, each holding a "form" key

        Raises:
            ValueError: If a form is unknown or a parameter is out of range
        """

        def split(block: Dict[str, Any]):
            params = {
                k: v
                for k, v in block.items()
                if k not in ("form", "allow_noncompliant", "truncation_n")
            }
            return block["form"], params

        kernel_form, kernel_params = split(kernel)
        probability_form, probability_params = split(probability)
        breakup_form, breakup_params = split(breakup)
        return CollisionModel(
            kernel=cls.create_kernel(kernel_form, kernel_params, truncation_n),
            probability=cls.create_probability(probability_form, probability_params),
            distribution=cls.create_distribution(breakup_form, breakup_params),
        )
