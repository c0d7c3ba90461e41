from .analytic import (
    smoluchowski_constant_analytic,
    smoluchowski_constant_cell_counts,
    smoluchowski_constant_m0,
)
from .brute_force import brute_force_rhs, brute_force_terms, relative_discrepancy
from .convergence_study import ConvergenceStudyResult, truncation_convergence_study
from .oracle_suite import ORACLE_CASES, OracleCase, OracleSettings, run_oracle_suite

__all__ = [
    "smoluchowski_constant_analytic",
    "smoluchowski_constant_cell_counts",
    "smoluchowski_constant_m0",
    "brute_force_rhs",
    "brute_force_terms",
    "relative_discrepancy",
    "ConvergenceStudyResult",
    "truncation_convergence_study",
    "ORACLE_CASES",
    "OracleCase",
    "OracleSettings",
    "run_oracle_suite",
]
