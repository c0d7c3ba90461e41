from dataclasses import dataclass
from typing import Any, Dict, Optional

from ..data.initial_conditions import create_initial_condition
from ..data.snapshot_store import SnapshotStore
from ..model.assumption_audit import AuditConfig, audit_assumptions
from ..model.model_factory import CollisionModel, ModelFactory
from ..utils.config import RunConfig
from ..utils.exceptions import StiffnessError
from ..utils.logger import setup_logger
from .grid import build_grid, moment, project_initial
from .integrator import RunResult, TimeStepperConfig, run
from .operators import OperatorWorkspace
from .simulation_report import SimulationReport, render_template


@dataclass
class CommandOutcome:
    """Outputs of one command; `passed` is False for a flagged study or failed oracle"""

    command: str
    output_dir: str
    passed: bool = True
    result: Any = None


class SimulationRunner:
    """
    Executes the simulate, audit, converge and oracle commands for one RunConfig

    Attributes:
        config (RunConfig): Validated settings
        store (SnapshotStore): Output directory writer
        threads (int): Worker threads for converge and oracle
    """

    def __init__(self, config: RunConfig, threads: int = 1, dump_tables: bool = False):
        self.config = config
        self.threads = max(1, int(threads))
        self.dump_tables = dump_tables
        self.store = SnapshotStore(config.output_dir)
        self.logger = setup_logger(__name__)

    def run(self) -> CommandOutcome:
        commands = {
            "simulate": self.simulate,
            "audit": self.audit,
            "converge": self.converge,
            "oracle": self.oracle,
        }
        return commands[self.config.command]()

    def _build_model(self, truncation_n: Optional[float] = None) -> CollisionModel:
        truncation = self.config.truncation_n if truncation_n is None else truncation_n
        return ModelFactory.create_model(
            self.config.kernel, self.config.probability, self.config.breakup, truncation
        )

    def _log_banner(self, title: str, lines: Dict[str, Any]) -> None:
        self.logger.info("=" * 50)
        self.logger.info(title)
        for key, value in lines.items():
            self.logger.info(f"{key}: {value}")
        self.logger.info("=" * 50)

    def simulate(self) -> CommandOutcome:
        """
        Run one simulation and write moments.csv, snapshots/*.csv and report.txt.

        Raises:
            StiffnessError: After writing the partial outputs and abort_state.csv
        """
        cfg = self.config
        model = self._build_model()
        if not model.kernel.is_gamma2_compliant():
            self.logger.warning(
                f"Kernel {model.kernel.describe()} is outside the product-sum class "
                f"0 < alpha <= beta < 1; running under allow_noncompliant"
            )
        grid = build_grid(
            cfg.grid["zmin"], cfg.grid["n"], cfg.grid["cells"], cfg.grid["spacing"]
        )
        initial = create_initial_condition(cfg.initial)
        time_config = TimeStepperConfig.from_dict(cfg.time)

        self._log_banner(
            "Starting simulation",
            {
                "Model": model.describe(),
                "Grid": f"{grid.size} {grid.spacing} cells on "
                f"[{grid.zmin:g}, {grid.domain_max:g}]",
                "Initial condition": initial.describe(),
                "Method": f"{time_config.method}, t_end={time_config.t_end:g}",
            },
        )

        ws = OperatorWorkspace.build(
            grid, model.kernel, model.probability, model.distribution
        )
        if self.dump_tables:
            self.store.save_tables(ws.to_frames())
            self.logger.info(f"Operator tables written to {cfg.output_dir}")

        g0 = project_initial(initial, grid)
        try:
            result = run(g0, ws, time_config)
        except StiffnessError as error:
            self.logger.error(f"Integration aborted: {error}")
            partial = RunResult(
                final=error.state, series=error.series, reports=error.reports,
                snapshots=error.snapshots,
            )
            self._write_run(
                partial, model, initial.describe(), ws, time_config, str(error)
            )
            self.store.save_state(error.state, "abort_state.csv", directory="")
            raise

        report = self._write_run(result, model, initial.describe(), ws, time_config)
        diagnostics = report.diagnostics
        if diagnostics["norm_growth"]["super_exponential"]:
            self.logger.warning(
                "The (1 + z)-weighted norm grows faster than exponentially"
            )
        mass_loss_time = diagnostics["mass_loss_time"]
        if mass_loss_time is not None:
            self.logger.warning(
                f"Suspected gelation: M1 fell below M1(0) at t={mass_loss_time:.6g}"
            )
        gelation_time = diagnostics["gelation_time"]
        if gelation_time is not None:
            self.logger.warning(
                "Suspected gelation: over 10% of M1 sits above n/2 "
                f"from the snapshot at t={gelation_time:.6g}"
            )

        self._log_banner(
            "Simulation finished",
            {
                "Accepted steps": len(result.reports),
                "Rejected steps": result.rejected_steps,
                "M0": f"{moment(g0, 0):.12g} -> {moment(result.final, 0):.12g}",
                "M1": f"{moment(g0, 1):.12g} -> {moment(result.final, 1):.12g}",
                "Max |mass drift|": f"{diagnostics['max_mass_drift']:.3e}",
                "Outputs": cfg.output_dir,
            },
        )
        return CommandOutcome("simulate", cfg.output_dir, True, result)

    def _write_run(
        self,
        result: RunResult,
        model: CollisionModel,
        initial: str,
        ws: OperatorWorkspace,
        time_config: TimeStepperConfig,
        aborted: Optional[str] = None,
    ) -> SimulationReport:
        self.store.save_moments(result.series.to_frame())
        for _, state in sorted(result.snapshots.items()):
            self.store.save_state(state)
        report = SimulationReport(
            model=model.describe(),
            initial=initial,
            workspace=ws,
            time_config=time_config,
            result=result,
            aborted=aborted,
        )
        self.store.save_text(report.render(), "report.txt")
        return report

    def audit(self) -> CommandOutcome:
        block = self.config.audit
        options: Dict[str, Any] = {
            key: value
            for key, value in block.items()
            if key not in ("deltas", "w_values")
        }
        for key in ("deltas", "w_values"):
            if key in block:
                options[key] = tuple(block[key])
        audit_config = AuditConfig(**options)
        model = self._build_model(truncation_n=float("inf"))

        self._log_banner("Starting assumption audit", {"Model": model.describe()})
        report = audit_assumptions(
            model.kernel, model.probability, model.distribution, audit_config
        )
        text = render_template(
            "audit_report.txt", model=model.describe(), lines=report.to_lines()
        )
        self.store.save_text(text, "report.txt")
        self.logger.info(f"Audit {'passed' if report.all_ok else 'found violations'}")
        return CommandOutcome("audit", self.config.output_dir, report.all_ok, report)

    def converge(self) -> CommandOutcome:
        from ..oracles.convergence_study import (
            DEFAULT_CELLS_PER_DOUBLING,
            truncation_convergence_study,
        )

        cfg = self.config
        n_values = cfg.study["n_values"]
        t_end = float(cfg.study.get("t_end", cfg.time.get("t_end", 1.0)))
        time_config = TimeStepperConfig.from_dict({**cfg.time, "t_end": t_end})
        model = self._build_model(truncation_n=max(n_values))
        initial = create_initial_condition(cfg.initial)

        self._log_banner(
            "Starting truncation study",
            {"Model": model.describe(), "n values": n_values, "t_end": t_end},
        )
        study = truncation_convergence_study(
            model,
            initial,
            n_values,
            t_end,
            time_config=time_config,
            zmin=cfg.grid.get("zmin"),
            cells_per_doubling=int(
                cfg.study.get("cells_per_doubling", DEFAULT_CELLS_PER_DOUBLING)
            ),
            threads=self.threads,
        )
        self.store.save_table(study.to_long_frame(), "convergence.csv")
        rows = [
            f"n={row.n:<10g} cells={int(row.cells):<6d} "
            f"l1_distance={row.l1_distance:.6e} mass_drift={row.mass_drift:.3e}"
            for row in study.table.itertuples()
        ]
        summary = render_template(
            "study_summary.txt",
            title="truncation convergence study",
            description=(
                f"{model.describe()}; "
                f"reference n={study.reference_n:g}, t_end={t_end:g}"
            ),
            rows=rows,
            passed=study.monotone,
        )
        self.store.save_text(summary, "summary.txt")
        return CommandOutcome("converge", cfg.output_dir, study.monotone, study)

    def oracle(self) -> CommandOutcome:
        from ..oracles.oracle_suite import OracleSettings, run_oracle_suite

        cfg = self.config
        settings = OracleSettings(
            cells=int(cfg.grid.get("cells", OracleSettings.cells)),
            n=float(cfg.grid.get("n", OracleSettings.n)),
            t_end=float(cfg.time.get("t_end", OracleSettings.t_end)),
            rel_tol=float(cfg.time.get("rel_tol", OracleSettings.rel_tol)),
            seed=int(cfg.audit.get("seed", OracleSettings.seed)),
        )
        self._log_banner("Starting oracle suite", {"Settings": settings})
        table = run_oracle_suite(settings, threads=self.threads)
        self.store.save_table(table, "oracle.csv")
        passed = bool(table["passed"].all())
        rows = [
            f"{'PASS' if row.passed else 'FAIL'} {row.case}.{row.metric} "
            f"= {row.value:.3e} (tolerance {row.tolerance:.1e}, {row.reference})"
            for row in table.itertuples()
        ]
        summary = render_template(
            "study_summary.txt",
            title="oracle suite",
            description=str(settings),
            rows=rows,
            passed=passed,
        )
        self.store.save_text(summary, "summary.txt")
        return CommandOutcome("oracle", cfg.output_dir, passed, table)
