"""Exception hierarchy shared by the solver, the audit and the CLI."""

from typing import Any, Iterable, List, Optional


class PbeError(Exception):
    """Base class for all solver errors"""


class DomainError(PbeError, ValueError):
    """Raised for arguments outside the domain (volume <= 0, r < 0, t < 0)"""


class UnsupportedRegimeError(DomainError):
    """Raised for breakup distributions with an infinite or infeasible fragment count"""


class ConfigError(PbeError, ValueError):
    """Aggregated configuration problems, all reported at once"""

    def __init__(self, errors: Iterable[str]):
        self.errors: List[str] = list(errors)
        super().__init__("; ".join(self.errors))


class ContractViolation(PbeError):
    """Raised when an operator gets a state on another grid, or an oracle is misused"""


class StiffnessError(PbeError, RuntimeError):
    """
    Raised when the step size underflows dt_min while steps keep being rejected.

    Carries the last accepted state and whatever the run had recorded so far so
    the caller can preserve partial outputs.
    """

    def __init__(
        self,
        message: str,
        state: Any = None,
        series: Any = None,
        reports: Optional[list] = None,
        snapshots: Optional[dict] = None,
    ):
        super().__init__(message)
        self.state = state
        self.series = series
        self.reports = reports or []
        self.snapshots = snapshots or {}
