import math

import numpy as np
import pytest
from scipy import integrate

from src.engine.grid import build_grid
from src.oracles.analytic import (
    smoluchowski_constant_analytic,
    smoluchowski_constant_cell_counts,
    smoluchowski_constant_m0,
    smoluchowski_constant_solution,
)
from src.utils.exceptions import DomainError


def test_initial_profile():
    value = smoluchowski_constant_analytic(1.0, 0.0)
    assert value == pytest.approx(math.exp(-1.0), rel=1e-15)


@pytest.mark.parametrize("t", [0.0, 0.5, 3.0])
def test_mass_is_constant(t):
    mass, _ = integrate.quad(
        lambda z: z * smoluchowski_constant_analytic(z, t), 0.0, np.inf
    )
    assert mass == pytest.approx(1.0, rel=1e-8)


def test_number_follows_moment_ode():
    assert smoluchowski_constant_m0(2.0) == pytest.approx(0.5)
    number, _ = integrate.quad(
        lambda z: smoluchowski_constant_analytic(z, 2.0), 0.0, np.inf
    )
    assert number == pytest.approx(0.5, rel=1e-8)


def test_solution_profile_matches_formula():
    solution = smoluchowski_constant_solution(1.0)
    z = np.array([0.1, 1.0, 7.0])
    np.testing.assert_allclose(
        solution.density(z), smoluchowski_constant_analytic(z, 1.0), rtol=1e-14
    )


def test_cell_counts_sum_to_resolved_number():
    grid = build_grid(1e-3, 50.0, 64)
    counts = smoluchowski_constant_cell_counts(grid, 1.0)
    expected = smoluchowski_constant_solution(1.0).number(1e-3, 50.0)
    assert counts.sum() == pytest.approx(expected, rel=1e-12)


def test_negative_time():
    with pytest.raises(DomainError):
        smoluchowski_constant_analytic(1.0, -0.1)
    with pytest.raises(DomainError):
        smoluchowski_constant_m0(-1.0)
