import math

import pytest

from src.model.assumption_audit import (
    AuditConfig,
    _omega1_passes,
    audit_assumptions,
    gamma3_lower_bound,
)
from src.model.breakup_distribution import PowerLawDistribution, TabulatedDistribution
from src.model.coalescence_probability import (
    AlwaysCoalesce,
    ConstantProbability,
    NeverCoalesce,
)
from src.model.collision_kernel import ConstantKernel, ProductSumKernel


@pytest.fixture
def config():
    return AuditConfig(samples=400, subsets_per_delta=16)


@pytest.fixture
def compliant_kernel():
    return ProductSumKernel({"k1": 1.0, "alpha": 0.3, "beta": 0.7})


def test_gamma3_lower_bound():
    assert gamma3_lower_bound(2.0) == 0.0
    assert gamma3_lower_bound(3.0) == pytest.approx(0.5)
    assert gamma3_lower_bound(1.0) == -math.inf


class TestBinaryBreakupAudit:
    @pytest.fixture
    def report(self, compliant_kernel, config):
        return audit_assumptions(
            compliant_kernel,
            AlwaysCoalesce(),
            PowerLawDistribution({"nu": 0.0}),
            config,
        )

    def test_all_assumptions_hold(self, report):
        assert report.gamma1_ok
        assert report.gamma2_ok
        assert report.gamma3_ok
        assert report.gamma4_ok
        assert report.gamma5_ok
        assert report.all_ok

    def test_constants(self, report):
        assert report.fragment_count == pytest.approx(2.0)
        assert report.gamma3_lower_bound == 0.0
        assert report.tau2 == 0.0
        assert (report.k1, report.alpha, report.beta) == (1.0, 0.3, 0.7)

    def test_omega1_decreases_to_zero(self, report):
        values = [omega for _, omega in report.omega1_samples]
        deltas = [delta for delta, _ in report.omega1_samples]
        assert deltas == sorted(deltas, reverse=True)
        assert all(later < earlier for earlier, later in zip(values, values[1:]))
        assert report.omega1_exponent == pytest.approx(1.0, abs=0.05)

    def test_analytic_constants(self, report, config):
        assert report.analytic_tau2 == 0.0
        for w in config.w_values:
            assert report.analytic_kW[w] == pytest.approx(2.0 / w)
            assert report.kW[w] == pytest.approx(2.0 / w, rel=1e-6)

    def test_report_lines(self, report):
        lines = report.to_lines()
        assert "N: 2" in lines
        assert "gamma3_lower_bound: 0" in lines
        assert "gamma2_ok: true" in lines


class TestSingularBreakupAudit:
    def test_tau2_follows_nu(self, compliant_kernel, config):
        report = audit_assumptions(
            compliant_kernel,
            ConstantProbability({"e0": 0.7}),
            PowerLawDistribution({"nu": -0.5}),
            config,
        )
        assert report.gamma3_lower_bound == pytest.approx(0.5)
        assert report.gamma3_ok
        assert report.gamma5_ok
        assert report.tau2 == pytest.approx(0.5, abs=1e-6)
        assert report.analytic_tau2 == 0.5

    def test_square_root_modulus_fails_decay_ratio(self, compliant_kernel, config):
        """Test Omega1 ~ delta^(1/2) falls only to 10^-1.5 of its first sample"""
        report = audit_assumptions(
            compliant_kernel,
            AlwaysCoalesce(),
            PowerLawDistribution({"nu": -0.5}),
            config,
        )
        values = [omega for _, omega in report.omega1_samples]
        assert all(later < earlier for earlier, later in zip(values, values[1:]))
        assert values[-1] / values[0] == pytest.approx(10**-1.5, rel=1e-6)
        assert report.omega1_exponent == pytest.approx(0.5, abs=1e-6)
        assert not report.gamma4_ok
        assert not report.all_ok

    def test_analytic_modulus_note(self, compliant_kernel, config):
        report = audit_assumptions(
            compliant_kernel,
            AlwaysCoalesce(),
            PowerLawDistribution({"nu": -0.5}),
            config,
        )
        assert report.analytic_omega1
        notes = [line for line in report.to_lines() if line.startswith("note: ")]
        assert any("analytic_omega1" in line for line in notes)

    def test_never_coalescing_violates_gamma3(self, compliant_kernel, config):
        """Test E = 0 lies below (N - 2)/(N - 1) = 1/2 when N = 3"""
        report = audit_assumptions(
            compliant_kernel,
            NeverCoalesce(),
            PowerLawDistribution({"nu": -0.5}),
            config,
        )
        assert not report.gamma3_ok
        assert report.gamma3_min_probability == 0.0
        assert not report.all_ok


def test_constant_kernel_is_flagged_not_rejected(config):
    report = audit_assumptions(
        ConstantKernel({"c": 1.0}),
        AlwaysCoalesce(),
        PowerLawDistribution({"nu": 0.0}),
        config,
    )
    assert not report.gamma2_ok
    assert report.gamma1_ok
    assert any("allow_noncompliant" in note for note in report.notes)


@pytest.mark.parametrize(
    "values, expected",
    [
        ([1.0, 1e-1, 1e-2, 1e-3], True),
        ([1.0, 0.9, 0.8, 0.665], False),
        ([1.0, 0.3, 0.1, 0.0316], False),
        ([1.0, 1e-1, 1e-1, 1e-3], False),
        ([0.0, 0.0, 0.0, 0.0], False),
    ],
)
def test_omega1_decay_rule(values, expected):
    samples = list(zip([1e-1, 1e-2, 1e-3, 1e-4], values))
    assert _omega1_passes(samples, 1e-2) is expected


def test_fragment_packed_near_zero_fails_gamma4(compliant_kernel, config):
    """Test one fragment in u < 1e-5 keeps Omega1 from shrinking with |U|"""
    small_mass = 1e5 * (1e-5**2) / 2.0
    top = (1.0 - small_mass) / ((1.0 - 0.99**2) / 2.0)
    distribution = TabulatedDistribution([0.0, 1e-5, 0.99, 1.0], [1e5, 0.0, top])
    report = audit_assumptions(compliant_kernel, AlwaysCoalesce(), distribution, config)
    values = [omega for _, omega in report.omega1_samples]
    assert values[-1] > 1e-2 * values[0]
    assert not report.gamma4_ok
