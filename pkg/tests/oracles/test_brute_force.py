import numpy as np
import pytest

from src.engine.grid import NumberDensity, build_grid
from src.engine.operators import OperatorWorkspace, allocate_fragments
from src.model.breakup_distribution import PowerLawDistribution, TabulatedDistribution
from src.model.model_factory import ModelFactory
from src.oracles.brute_force import (
    brute_force_rhs,
    brute_force_terms,
    fragment_counts,
    relative_discrepancy,
)
from src.utils.exceptions import ContractViolation


def _model(probability, kernel=None, nu=-0.5, n=1.0):
    return ModelFactory.create_model(
        kernel or {"form": "product_sum", "alpha": 0.3, "beta": 0.7},
        probability,
        {"form": "power_law", "nu": nu},
        truncation_n=n,
    )


class TestBruteForce:
    @pytest.fixture(params=[(0.01, 5, "geometric"), (0.05, 4, "uniform")])
    def grid(self, request):
        zmin, cells, spacing = request.param
        return build_grid(zmin, 1.0, cells, spacing)

    @pytest.mark.parametrize(
        "probability",
        [
            {"form": "volume_ratio", "e_min": 0.2, "e_max": 0.9},
            {"form": "constant", "e0": 0.5},
            {"form": "one"},
            {"form": "zero"},
        ],
    )
    def test_matches_workspace(self, grid, probability):
        model = _model(probability)
        ws = OperatorWorkspace.build(
            grid, model.kernel, model.probability, model.distribution
        )
        rng = np.random.default_rng(0)
        cache = {}
        for _ in range(25):
            g = NumberDensity(grid, rng.uniform(0.0, 1.0, grid.size))
            terms = brute_force_terms(g, model, fragment_cache=cache)
            scale = float(np.max(sum(terms.values())))
            candidates = {
                "coagulation_gain": ws.coagulation_gain_values(g.values),
                "collision_loss": ws.collision_loss_values(g.values),
                "breakage_gain": ws.breakage_gain_values(g.values),
            }
            for name, values in candidates.items():
                assert relative_discrepancy(values, terms[name], scale) <= 1e-12
            reference = brute_force_rhs(g, model, fragment_cache=cache)
            rates = ws.rhs_values(g.values)
            assert relative_discrepancy(rates, reference, scale) <= 1e-12

    def test_zero_state(self, grid):
        g = NumberDensity.zeros(grid)
        rates = brute_force_rhs(g, _model({"form": "constant", "e0": 0.5}))
        assert np.all(rates == 0.0)

    def test_breakage_scales_with_one_minus_e(self, grid):
        g = NumberDensity(grid, np.linspace(0.5, 1.5, grid.size))
        kernel = {"form": "constant", "c": 1.0}

        def breakage(probability):
            return brute_force_terms(g, _model(probability, kernel))["breakage_gain"]

        half = breakage({"form": "constant", "e0": 0.5})
        quarter = breakage({"form": "constant", "e0": 0.75})
        never = breakage({"form": "zero"})
        always = breakage({"form": "one"})
        np.testing.assert_allclose(half, 0.5 * never, rtol=1e-14)
        np.testing.assert_allclose(quarter, 0.25 * never, rtol=1e-14)
        assert np.all(always == 0.0)

    def test_refuses_large_grids(self):
        grid = build_grid(0.01, 1.0, 6)
        with pytest.raises(ContractViolation):
            brute_force_rhs(NumberDensity.zeros(grid), _model({"form": "one"}))


class TestFragmentCounts:
    """Fragment counts integrated from P pointwise, apart from the workspace tables"""

    @pytest.fixture
    def grid(self):
        return build_grid(0.01, 1.0, 5, "geometric")

    @pytest.fixture(
        params=[
            PowerLawDistribution({"nu": -0.5}),
            PowerLawDistribution(),
            TabulatedDistribution([0.0, 0.3, 1.0], [4.0, (1.0 - 4.0 * 0.045) / 0.455]),
        ]
    )
    def distribution(self, request):
        return request.param

    def test_conserves_mass(self, grid, distribution):
        for s in (0.005, 0.04, 0.3, 0.9):
            counts = fragment_counts(distribution, grid.pivots, s)
            assert np.all(counts >= 0.0)
            assert float(np.dot(counts, grid.pivots)) == pytest.approx(s, rel=1e-13)

    def test_agrees_with_table_allocation(self, grid, distribution):
        for s in (0.04, 0.3, 0.9):
            np.testing.assert_allclose(
                fragment_counts(distribution, grid.pivots, s),
                allocate_fragments(distribution, grid, s),
                rtol=1e-11,
                atol=1e-13,
            )

    def test_tiny_parent_goes_to_first_cell(self, grid, distribution):
        counts = fragment_counts(distribution, grid.pivots, 0.5 * grid.pivots[0])
        assert counts[0] == pytest.approx(0.5)
        assert np.all(counts[1:] == 0.0)

    def test_cache_is_filled_and_reused(self, grid):
        model = _model({"form": "constant", "e0": 0.5})
        g = NumberDensity(grid, np.linspace(0.5, 1.5, grid.size))
        cache = {}
        first = brute_force_terms(g, model, fragment_cache=cache)
        assert cache
        second = brute_force_terms(g, model, fragment_cache=cache)
        np.testing.assert_array_equal(first["breakage_gain"], second["breakage_gain"])


def test_relative_discrepancy():
    reference = np.array([1.0, -2.0])
    assert relative_discrepancy(reference, reference) == 0.0
    assert relative_discrepancy(np.array([1.0, -1.0]), reference) == pytest.approx(0.5)
    assert relative_discrepancy(np.zeros(2), np.zeros(2)) == 0.0
