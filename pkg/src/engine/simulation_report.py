import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from jinja2 import Template

from src.engine.grid import moment, weighted_norm
from src.engine.integrator import RunResult, TimeStepperConfig
from src.engine.metrics.moment_metrics import MomentMetrics
from src.engine.operators import OperatorWorkspace

TEMPLATE_DIR = os.path.join(os.path.dirname(__file__), "..", "templates")


def render_template(name: str, **context: Any) -> str:
    with open(os.path.join(TEMPLATE_DIR, name), "r", encoding="utf-8") as f:
        template = Template(f.read())
    return template.render(**context)


@dataclass
class SimulationReport:
    """Summary of one simulate run, rendered into report.txt"""

    model: str
    initial: str
    workspace: OperatorWorkspace
    time_config: TimeStepperConfig
    result: RunResult
    aborted: Optional[str] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        series = self.result.series.to_frame()
        final = self.result.final
        self.diagnostics = {
            "max_mass_drift": MomentMetrics.calculate_max_mass_drift(series),
            "mass_bound_ok": MomentMetrics.check_mass_bound(series),
            "norm_growth": MomentMetrics.fit_norm_growth(series),
            "mass_loss_time": MomentMetrics.detect_mass_loss(series),
            "boundary_mass_fraction": MomentMetrics.boundary_mass_fraction(final),
            "gelation_time": MomentMetrics.detect_gelation(self.result.snapshots),
        }

    def _moment_rows(self) -> List[Dict[str, Any]]:
        initial = self.result.snapshots[min(self.result.snapshots)]
        final = self.result.final
        rows = [
            {"name": f"M{r}", "initial": moment(initial, r), "final": moment(final, r)}
            for r in (0, 1, 2)
        ]
        rows.append(
            {
                "name": "norm_1plusz",
                "initial": weighted_norm(initial),
                "final": weighted_norm(final),
            }
        )
        return rows

    def render(self) -> str:
        grid = self.workspace.grid
        defect = self.workspace.count_defect
        max_count_defect = None
        if self.workspace.breakage_enabled and len(defect):
            max_count_defect = float(defect.max())
        return render_template(
            "simulation_report.txt",
            model=self.model,
            initial=self.initial,
            grid_cells=grid.size,
            grid_spacing=grid.spacing,
            zmin=grid.zmin,
            n=grid.domain_max,
            ratio=grid.ratio,
            unresolved_mass=self.result.final.unresolved_mass,
            method=self.time_config.method,
            rel_tol=self.time_config.rel_tol,
            abs_tol=self.time_config.abs_tol,
            max_count_defect=max_count_defect,
            t_end=self.result.final.time,
            moments=self._moment_rows(),
            accepted_steps=len(self.result.reports),
            rejected_steps=self.result.rejected_steps,
            negativity_clips=self.result.negativity_clips,
            aborted=self.aborted,
            **self.diagnostics,
        )
