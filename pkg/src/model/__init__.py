from .assumption_audit import AssumptionReport, AuditConfig, audit_assumptions
from .breakup_distribution import (
    BreakupDistribution,
    PowerLawDistribution,
    TabulatedDistribution,
    eval_P,
    fragment_count,
)
from .coalescence_probability import (
    AlwaysCoalesce,
    CoalescenceProbability,
    ConstantProbability,
    NeverCoalesce,
    VolumeRatioProbability,
)
from .collision_kernel import (
    CollisionKernel,
    ConstantKernel,
    ProductSumKernel,
    eval_phi,
    eval_phi_truncated,
)
from .model_factory import CollisionModel, ModelFactory

__all__ = [
    "AssumptionReport",
    "AuditConfig",
    "audit_assumptions",
    "BreakupDistribution",
    "PowerLawDistribution",
    "TabulatedDistribution",
    "eval_P",
    "fragment_count",
    "AlwaysCoalesce",
    "CoalescenceProbability",
    "ConstantProbability",
    "NeverCoalesce",
    "VolumeRatioProbability",
    "CollisionKernel",
    "ConstantKernel",
    "ProductSumKernel",
    "eval_phi",
    "eval_phi_truncated",
    "CollisionModel",
    "ModelFactory",
]
