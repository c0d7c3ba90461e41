"""
Sampled audit of the structural assumptions on Phi, E and P.

    (G1) Phi is nonnegative and measurable
    (G2) Phi(z, z1) = k1 (z^alpha z1^beta + z1^alpha z^beta),
         0 < alpha <= beta < 1, k1 >= 0
    (G3) (N - 2) / (N - 1) <= E(z, z1) <= 1 on (0, 1) x (0, 1)
    (G4) int_0^z1 chi_U(z) P(z | z1 - z2; z2) dz <= Omega1(|U|) z1^-alpha,
         Omega1(d) -> 0
    (G5) P(z | z1; z2) <= k(W) z^-tau2 on (0, W) whenever z1 + z2 > W, tau2 in [0, 1)

None of these can be decided exactly by sampling, so the audit is a heuristic:
G4 is sampled with unions of random subintervals U (plus the worst case (0, d)
for densities decreasing in z) and passes when the sampled modulus decreases
monotonically and its last sample lies below `decay_ratio` times the first;
the fitted log-log slope is only reported. G5 fits k(W) and tau2 to the upper
envelope of sampled P values.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..utils.logger import setup_logger
from .breakup_distribution import BreakupDistribution, PowerLawDistribution
from .coalescence_probability import CoalescenceProbability
from .collision_kernel import CollisionKernel

logger = setup_logger(__name__)


@dataclass(frozen=True)
class AuditConfig:
    samples: int = 2000
    seed: int = 0
    deltas: Tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4)
    w_values: Tuple[float, ...] = (0.5, 1.0, 2.0)
    tolerance: float = 1e-9
    z1_fraction: float = 0.1
    decay_ratio: float = 1e-2
    subsets_per_delta: int = 64
    intervals_per_subset: int = 8
    gamma4_w: float = 1.0


@dataclass
class AssumptionReport:
    gamma1_ok: bool
    gamma2_ok: bool
    gamma3_ok: bool
    gamma4_ok: bool
    gamma5_ok: bool
    k1: float
    alpha: float
    beta: float
    tau2: float
    kW: Dict[float, float]
    omega1_samples: List[Tuple[float, float]]
    gamma3_lower_bound: float
    fragment_count: float
    gamma3_min_probability: float
    omega1_exponent: float
    analytic_omega1: List[Tuple[float, float]] = field(default_factory=list)
    analytic_tau2: Optional[float] = None
    analytic_kW: Dict[float, float] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return all(
            [
                self.gamma1_ok,
                self.gamma2_ok,
                self.gamma3_ok,
                self.gamma4_ok,
                self.gamma5_ok,
            ]
        )

    def to_lines(self) -> List[str]:
        """Render the report as key: value lines"""
        lines = [
            f"gamma1_ok: {str(self.gamma1_ok).lower()}",
            f"gamma2_ok: {str(self.gamma2_ok).lower()}",
            f"gamma3_ok: {str(self.gamma3_ok).lower()}",
            f"gamma4_ok: {str(self.gamma4_ok).lower()}",
            f"gamma5_ok: {str(self.gamma5_ok).lower()}",
            f"all_ok: {str(self.all_ok).lower()}",
            f"N: {self.fragment_count:.12g}",
            f"k1: {self.k1:.12g}",
            f"alpha: {self.alpha:.12g}",
            f"beta: {self.beta:.12g}",
            f"gamma3_lower_bound: {self.gamma3_lower_bound:.12g}",
            f"gamma3_min_probability: {self.gamma3_min_probability:.12g}",
            f"tau2: {self.tau2:.12g}",
            f"omega1_exponent: {self.omega1_exponent:.6g}",
        ]
        for w, k in sorted(self.kW.items()):
            lines.append(f"kW[{w:g}]: {k:.12g}")
        for delta, omega in self.omega1_samples:
            lines.append(f"omega1[{delta:g}]: {omega:.12g}")
        if self.analytic_tau2 is not None:
            lines.append(f"analytic_tau2: {self.analytic_tau2:.12g}")
        for w, k in sorted(self.analytic_kW.items()):
            lines.append(f"analytic_kW[{w:g}]: {k:.12g}")
        for delta, omega in self.analytic_omega1:
            lines.append(f"analytic_omega1[{delta:g}]: {omega:.12g}")
        for note in self.notes:
            lines.append(f"note: {note}")
        return lines


def gamma3_lower_bound(fragment_count: float) -> float:
    if fragment_count <= 1.0:
        return -math.inf
    return (fragment_count - 2.0) / (fragment_count - 1.0)


def _log_uniform(
    rng: np.random.Generator, low: float, high: float, size: int
) -> np.ndarray:
    return np.exp(rng.uniform(math.log(low), math.log(high), size))


def _check_gamma1(
    kernel: CollisionKernel, rng: np.random.Generator, samples: int
) -> bool:
    z = _log_uniform(rng, 1e-6, 1e3, samples)
    z1 = _log_uniform(rng, 1e-6, 1e3, samples)
    forward = np.asarray(kernel.evaluate(z, z1))
    backward = np.asarray(kernel.evaluate(z1, z))
    return bool(
        np.all(np.isfinite(forward))
        and np.all(forward >= 0)
        and np.array_equal(forward, backward)
    )


def _check_gamma3(
    probability: CoalescenceProbability,
    bound: float,
    rng: np.random.Generator,
    config: AuditConfig,
) -> Tuple[bool, float]:
    # open unit square only; the condition is local
    z = rng.uniform(0.0, 1.0, config.samples)
    z1 = rng.uniform(0.0, 1.0, config.samples)
    z = np.where(z > 0, z, 0.5)
    z1 = np.where(z1 > 0, z1, 0.5)
    values = np.asarray(probability.evaluate(z, z1))
    min_value = float(values.min())
    in_range = bool(np.all((values >= 0) & (values <= 1)))
    return in_range and min_value >= bound - config.tolerance, min_value


def _subset_integral(
    distribution: BreakupDistribution, lows: np.ndarray, highs: np.ndarray, z1: float
) -> float:
    # overlapping intervals only shrink |U|, so the estimate stays an upper bound
    count, _ = distribution.segment_moments(lows, np.minimum(highs, z1), z1)
    return float(np.sum(count))


def _estimate_omega1(
    distribution: BreakupDistribution,
    alpha: float,
    rng: np.random.Generator,
    config: AuditConfig,
) -> List[Tuple[float, float]]:
    w = config.gamma4_w
    z1_values = np.concatenate(
        [
            _log_uniform(rng, config.z1_fraction * w, w, config.subsets_per_delta),
            [config.z1_fraction * w, w],
        ]
    )
    samples = []
    for delta in sorted(config.deltas, reverse=True):
        m = config.intervals_per_subset
        length = delta / m
        best = 0.0
        for z1 in z1_values:
            scale = z1**alpha
            # worst case for densities decreasing in z
            head = _subset_integral(distribution, np.zeros(1), np.full(1, delta), z1)
            best = max(best, scale * head)
            starts = rng.uniform(0.0, 1.0 - length, m)
            union = _subset_integral(distribution, starts, starts + length, z1)
            best = max(best, scale * union)
        samples.append((float(delta), best))
    return samples


def _omega1_passes(samples: List[Tuple[float, float]], decay_ratio: float) -> bool:
    """Strictly decreasing as delta shrinks and ending below decay_ratio x the first"""
    values = [omega for _, omega in samples]
    if len(values) < 2 or values[0] <= 0:
        return False
    decreasing = all(later < earlier for earlier, later in zip(values, values[1:]))
    return decreasing and values[-1] < decay_ratio * values[0]


def _fit_exponent(samples: List[Tuple[float, float]]) -> float:
    points = [(math.log(d), math.log(o)) for d, o in samples if o > 0]
    if len(points) < 2:
        return float("nan")
    x, y = zip(*points)
    return float(np.polyfit(x, y, 1)[0])


def _estimate_gamma5(
    distribution: BreakupDistribution,
    w: float,
    rng: np.random.Generator,
    config: AuditConfig,
) -> Tuple[float, float, bool]:
    side = max(8, int(math.sqrt(config.samples)))
    parents = np.concatenate([[w * (1.0 + 1e-9)], _log_uniform(rng, w, 10.0 * w, side)])
    z = np.sort(_log_uniform(rng, 1e-6 * w, w, side))
    half = parents / 2.0
    table = np.asarray(distribution.evaluate(z[:, None], half[None, :], half[None, :]))
    envelope = table.max(axis=1)
    positive = envelope > 0
    if positive.sum() < 2:
        return 0.0, float(envelope.max(initial=0.0)), True
    slope = float(np.polyfit(np.log(z[positive]), np.log(envelope[positive]), 1)[0])
    tau2 = -slope
    if abs(tau2) < config.tolerance:
        tau2 = 0.0
    k = float(np.max(envelope * z**tau2))
    bounded = bool(np.all(table <= k * (z**-tau2)[:, None] * (1.0 + config.tolerance)))
    ok = bounded and -config.tolerance <= tau2 < 1.0
    return tau2, k, ok


def audit_assumptions(
    kernel: CollisionKernel,
    probability: CoalescenceProbability,
    distribution: BreakupDistribution,
    config: Optional[AuditConfig] = None,
) -> AssumptionReport:
    """
    Sample (G1)-(G5) for one model.

    Failures are recorded in the report and logged as warnings; nothing raises,
    so a noncompliant kernel can still be audited and run.
    """
    config = config or AuditConfig()
    rng = np.random.default_rng(config.seed)

    constants = kernel.gamma2_constants()
    n_fragments = distribution.fragment_count()
    bound = gamma3_lower_bound(n_fragments)

    gamma1_ok = _check_gamma1(kernel, rng, config.samples)
    gamma2_ok = kernel.is_gamma2_compliant()
    gamma3_ok, min_probability = _check_gamma3(probability, bound, rng, config)

    omega1_samples = _estimate_omega1(distribution, constants["alpha"], rng, config)
    gamma4_ok = _omega1_passes(omega1_samples, config.decay_ratio)

    kW: Dict[float, float] = {}
    tau2_values = []
    gamma5_ok = True
    for w in config.w_values:
        tau2, k, ok = _estimate_gamma5(distribution, float(w), rng, config)
        kW[float(w)] = k
        tau2_values.append(tau2)
        gamma5_ok = gamma5_ok and ok

    report = AssumptionReport(
        gamma1_ok=gamma1_ok,
        gamma2_ok=gamma2_ok,
        gamma3_ok=gamma3_ok,
        gamma4_ok=gamma4_ok,
        gamma5_ok=gamma5_ok,
        k1=constants["k1"],
        alpha=constants["alpha"],
        beta=constants["beta"],
        tau2=max(tau2_values) if tau2_values else 0.0,
        kW=kW,
        omega1_samples=omega1_samples,
        gamma3_lower_bound=bound,
        fragment_count=n_fragments,
        gamma3_min_probability=min_probability,
        omega1_exponent=_fit_exponent(omega1_samples),
    )

    if isinstance(distribution, PowerLawDistribution):
        _attach_power_law_constants(report, distribution, constants["alpha"], config)
    if not gamma2_ok:
        report.notes.append("kernel outside (G2); runs need kernel.allow_noncompliant")

    for name in ("gamma1", "gamma2", "gamma3", "gamma4", "gamma5"):
        if not getattr(report, f"{name}_ok"):
            logger.warning(
                f"Assumption {name} not satisfied for kernel {kernel.describe()}"
            )
    return report


def _attach_power_law_constants(
    report: AssumptionReport,
    distribution: PowerLawDistribution,
    alpha: float,
    config: AuditConfig,
) -> None:
    nu = distribution.nu
    report.analytic_tau2 = -nu if nu != 0 else 0.0
    report.analytic_kW = {
        float(w): (nu + 2.0) / float(w) ** (nu + 1.0) for w in config.w_values
    }
    if 0 < alpha < 1 and nu - alpha > -1:
        factor = (nu + 2.0) * ((1.0 - alpha) / (nu + 1.0 - alpha)) ** (1.0 - alpha)
        report.analytic_omega1 = [
            (float(d), factor * float(d) ** alpha)
            for d in sorted(config.deltas, reverse=True)
        ]
        z1_low = config.z1_fraction * config.gamma4_w
        report.notes.append(
            "analytic_omega1 covers z1 -> 0 and scales like delta^alpha; "
            f"the sampled omega1 draws z1 from [{z1_low:g}, {config.gamma4_w:g}] "
            "and misses that worst case"
        )
