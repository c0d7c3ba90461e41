import math

import numpy as np
import pytest

from src.model.collision_kernel import (
    ConstantKernel,
    ProductSumKernel,
    eval_phi,
    eval_phi_truncated,
)
from src.utils.exceptions import DomainError


class TestProductSumKernel:
    @pytest.fixture
    def kernel(self):
        return ProductSumKernel({"k1": 1.0, "alpha": 0.3, "beta": 0.7})

    def test_unit_volumes(self, kernel):
        """Test k1 (1 + 1) at z = z1 = 1"""
        assert eval_phi(kernel, 1.0, 1.0) == pytest.approx(2.0, rel=1e-15)

    def test_closed_form_substitution(self):
        """Test 2 (4^0.5 + 4^0.5) = 8"""
        kernel = ProductSumKernel({"k1": 2.0, "alpha": 0.5, "beta": 0.5})
        assert eval_phi(kernel, 4.0, 1.0) == pytest.approx(8.0, rel=1e-15)

    def test_default_k1(self):
        kernel = ProductSumKernel({"alpha": 0.3, "beta": 0.7})
        assert kernel.k1 == 1.0

    def test_symmetry_is_exact(self, kernel):
        """Test Phi(z, z1) == Phi(z1, z) bit for bit on random pairs"""
        rng = np.random.default_rng(7)
        z = np.exp(rng.uniform(-8, 5, 10_000))
        z1 = np.exp(rng.uniform(-8, 5, 10_000))
        assert np.array_equal(kernel.evaluate(z, z1), kernel.evaluate(z1, z))

    def test_nonpositive_volume(self, kernel):
        with pytest.raises(DomainError):
            kernel.evaluate(0.0, 1.0)
        with pytest.raises(DomainError):
            kernel.evaluate(1.0, -2.0)
        with pytest.raises(DomainError):
            kernel.evaluate(np.array([1.0, np.nan]), 1.0)

    def test_negative_parameters(self):
        with pytest.raises(DomainError):
            ProductSumKernel({"k1": -1.0, "alpha": 0.3, "beta": 0.7})
        with pytest.raises(DomainError):
            ProductSumKernel({"alpha": -0.3, "beta": 0.7})

    def test_gamma2_compliance(self, kernel):
        assert kernel.is_gamma2_compliant()
        assert not ProductSumKernel({"alpha": 0.9, "beta": 0.3}).is_gamma2_compliant()
        assert not ProductSumKernel({"alpha": 0.5, "beta": 1.0}).is_gamma2_compliant()


class TestConstantKernel:
    def test_any_volumes(self):
        kernel = ConstantKernel({"c": 1.0})
        assert eval_phi(kernel, 0.3, 17.0) == 1.0
        values = kernel.evaluate(np.array([1e-6, 1.0, 1e3]), 2.0)
        assert np.array_equal(values, np.ones(3))

    def test_outside_product_sum_class(self):
        kernel = ConstantKernel()
        assert kernel.c == 1.0
        assert not kernel.is_gamma2_compliant()
        assert kernel.gamma2_constants() == {"k1": 0.5, "alpha": 0.0, "beta": 0.0}


class TestTruncation:
    def test_outside_support(self):
        """Test the indicator of z + z1 < n removes the pair"""
        kernel = ProductSumKernel({"alpha": 0.3, "beta": 0.7}, truncation_n=1.0)
        assert eval_phi_truncated(kernel, 0.8, 0.7) == 0.0

    def test_inside_support(self):
        kernel = ConstantKernel({"c": 1.0}, truncation_n=10.0)
        assert eval_phi_truncated(kernel, 1.0, 2.0) == 1.0

    def test_matches_untruncated_inside(self):
        kernel = ProductSumKernel(
            {"k1": 1.0, "alpha": 0.3, "beta": 0.7}, truncation_n=3.0
        )
        assert eval_phi_truncated(kernel, 1.0, 1.0) == pytest.approx(2.0, rel=1e-15)

    def test_boundary_is_excluded(self):
        kernel = ConstantKernel(truncation_n=2.0)
        assert eval_phi_truncated(kernel, 1.0, 1.0) == 0.0

    def test_vectorized_mask(self):
        kernel = ConstantKernel(truncation_n=1.0)
        z = np.array([0.1, 0.4, 0.6])
        values = kernel.evaluate_truncated(z, 0.5)
        assert np.array_equal(values, np.array([1.0, 1.0, 0.0]))

    def test_untruncated_by_default(self):
        kernel = ConstantKernel()
        assert math.isinf(kernel.truncation_n)
        assert eval_phi_truncated(kernel, 1e6, 1e6) == 1.0

    def test_with_truncation_keeps_parameters(self):
        kernel = ProductSumKernel({"k1": 2.0, "alpha": 0.2, "beta": 0.4})
        truncated = kernel.with_truncation(5.0)
        assert truncated.truncation_n == 5.0
        assert truncated.evaluate(1.5, 2.0) == kernel.evaluate(1.5, 2.0)

    def test_invalid_truncation(self):
        with pytest.raises(DomainError):
            ConstantKernel(truncation_n=0.0)
