import pytest

from src.oracles.oracle_suite import (
    ORACLE_CASES,
    OracleCase,
    OracleSettings,
    run_oracle_suite,
)

COLUMNS = ["case", "reference", "metric", "value", "tolerance", "passed"]


@pytest.fixture
def quick_settings():
    return OracleSettings(cells=48, n=20.0, t_end=0.2, brute_force_states=20)


def test_cases_are_reproducible_from_constants():
    names = [case.name for case in ORACLE_CASES]
    assert names == [
        "smoluchowski_constant",
        "pure_binary_exchange",
        "collisional_breakage_growth",
        "reduction_consistency",
        "brute_force_small_grid",
    ]
    assert all(case.tolerance > 0 for case in ORACLE_CASES)


def test_case_validation():
    with pytest.raises(ValueError):
        OracleCase("bad", "AnalyticClosedForm", 0.0, lambda settings: [])
    with pytest.raises(ValueError):
        OracleCase("bad", "MonteCarlo", 1e-3, lambda settings: [])


def test_unknown_case():
    with pytest.raises(ValueError, match="unknown oracle cases"):
        run_oracle_suite(cases=["gelation"])


def test_exact_cases_pass_on_a_coarse_grid(quick_settings):
    table = run_oracle_suite(
        quick_settings,
        cases=[
            "pure_binary_exchange",
            "reduction_consistency",
            "brute_force_small_grid",
        ],
        threads=3,
    )
    assert list(table.columns) == COLUMNS
    assert set(table["case"]) == {
        "pure_binary_exchange",
        "reduction_consistency",
        "brute_force_small_grid",
    }
    assert table["passed"].all(), table.to_string()


@pytest.mark.slow
def test_full_suite_passes():
    table = run_oracle_suite(OracleSettings(), threads=2)
    assert table["passed"].all(), table.to_string()
    rows = table[table["case"] == "smoluchowski_constant"]
    smoluchowski = rows.set_index("metric")["value"]
    assert smoluchowski["m0_relative_error"] <= 1e-2
    assert smoluchowski["l1_relative_error"] <= 2e-2
