import numpy as np
import pandas as pd
import pytest

from src.model.breakup_distribution import (
    PowerLawDistribution,
    TabulatedDistribution,
    eval_P,
    fragment_count,
)
from src.utils.exceptions import DomainError, UnsupportedRegimeError


class TestPowerLawDistribution:
    @pytest.fixture
    def binary(self):
        return PowerLawDistribution({"nu": 0.0})

    def test_binary_density(self, binary):
        """Test P = 2 / (z1 + z2) for nu = 0"""
        assert eval_P(binary, 0.5, 1.0, 1.0) == pytest.approx(1.0, rel=1e-15)

    def test_support_rule(self, binary):
        assert eval_P(binary, 3.0, 1.0, 1.0) == 0.0

    def test_count_integral_by_quadrature(self):
        count, mass = PowerLawDistribution({"nu": -0.5}).quadrature_moments(1.0, 1.0)
        assert count == pytest.approx(3.0, rel=1e-10)
        assert mass == pytest.approx(2.0, rel=1e-10)

    @pytest.mark.parametrize("nu, expected", [(0.0, 2.0), (-0.5, 3.0), (-0.75, 5.0)])
    def test_fragment_count(self, nu, expected):
        count = fragment_count(PowerLawDistribution({"nu": nu}))
        assert count == pytest.approx(expected)

    @pytest.mark.parametrize("nu", [-1.0, -1.5])
    def test_unsupported_regime(self, nu):
        with pytest.raises(UnsupportedRegimeError, match="unsupported-regime"):
            PowerLawDistribution({"nu": nu})

    def test_positive_nu_rejected(self):
        with pytest.raises(DomainError):
            PowerLawDistribution({"nu": 0.5})

    @pytest.mark.parametrize("nu", [0.0, -0.25, -0.5, -0.75])
    def test_count_and_mass_identities(self, nu):
        """Test int P = N and int z P = z1 + z2 on random parent pairs"""
        dist = PowerLawDistribution({"nu": nu})
        rng = np.random.default_rng(11)
        for z1, z2 in rng.uniform(0.01, 10.0, (20, 2)):
            count, mass = dist.quadrature_moments(z1, z2)
            assert count == pytest.approx(dist.fragment_count(), rel=1e-6)
            assert mass == pytest.approx(z1 + z2, rel=1e-6)

    def test_parent_symmetry(self):
        dist = PowerLawDistribution({"nu": -0.5})
        z = np.array([0.01, 0.3, 1.2])
        assert np.array_equal(dist.evaluate(z, 0.4, 1.1), dist.evaluate(z, 1.1, 0.4))

    def test_segment_moments_cover_parent(self):
        dist = PowerLawDistribution({"nu": -0.5})
        count, mass = dist.segment_moments(
            np.array([0.0, 0.5]), np.array([0.5, 2.0]), 2.0
        )
        assert count.sum() == pytest.approx(3.0, rel=1e-14)
        assert mass.sum() == pytest.approx(2.0, rel=1e-14)

    def test_segment_above_parent_is_empty(self, binary):
        count, mass = binary.segment_moments(3.0, 4.0, 2.0)
        assert float(count) == 0.0
        assert float(mass) == 0.0

    def test_nonpositive_inputs(self, binary):
        with pytest.raises(DomainError):
            eval_P(binary, 0.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            eval_P(binary, 0.5, -1.0, 1.0)


class TestTabulatedDistribution:
    @pytest.fixture
    def uniform_binary(self):
        """q(u) = 2 on [0, 1] is binary breakage"""
        return TabulatedDistribution([0.0, 0.5, 1.0], [2.0, 2.0])

    def test_fragment_count(self, uniform_binary):
        assert uniform_binary.fragment_count() == pytest.approx(2.0)

    def test_matches_power_law_binary(self, uniform_binary):
        binary = PowerLawDistribution({"nu": 0.0})
        z = np.array([0.1, 0.7, 1.9])
        np.testing.assert_allclose(
            uniform_binary.evaluate(z, 0.8, 1.2),
            binary.evaluate(z, 0.8, 1.2),
            rtol=1e-14,
        )
        count, mass = uniform_binary.segment_moments(0.3, 1.1, 2.0)
        expected_count, expected_mass = binary.segment_moments(0.3, 1.1, 2.0)
        assert float(count) == pytest.approx(float(expected_count), rel=1e-14)
        assert float(mass) == pytest.approx(float(expected_mass), rel=1e-14)

    def test_quadrature_moments(self, uniform_binary):
        count, mass = uniform_binary.quadrature_moments(0.3, 0.9)
        assert count == pytest.approx(2.0, rel=1e-10)
        assert mass == pytest.approx(1.2, rel=1e-10)

    def test_mass_identity_enforced(self):
        with pytest.raises(DomainError, match="mass identity"):
            TabulatedDistribution([0.0, 1.0], [1.0])

    def test_malformed_bins(self):
        with pytest.raises(DomainError):
            TabulatedDistribution([0.0, 0.6, 0.5, 1.0], [2.0, 2.0, 2.0])
        with pytest.raises(DomainError):
            TabulatedDistribution([0.1, 1.0], [2.0])

    def test_from_csv(self, tmp_path):
        path = tmp_path / "q.csv"
        pd.DataFrame({"u_lo": [0.0, 0.5], "u_hi": [0.5, 1.0], "q": [2.0, 2.0]}).to_csv(
            path, index=False
        )
        dist = TabulatedDistribution.from_csv(str(path))
        assert dist.fragment_count() == pytest.approx(2.0)

    def test_from_csv_missing_columns(self, tmp_path):
        path = tmp_path / "q.csv"
        pd.DataFrame({"u": [0.5], "q": [2.0]}).to_csv(path, index=False)
        with pytest.raises(DomainError):
            TabulatedDistribution.from_csv(str(path))
