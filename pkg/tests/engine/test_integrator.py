import numpy as np
import pytest

from src.data.initial_conditions import ExponentialInitial
from src.engine.grid import NumberDensity, build_grid, moment, project_initial
from src.engine.integrator import (
    MomentSeries,
    TimeStepperConfig,
    relative_drift,
    run,
    step,
)
from src.engine.operators import OperatorWorkspace
from src.model.breakup_distribution import PowerLawDistribution
from src.model.coalescence_probability import (
    AlwaysCoalesce,
    ConstantProbability,
    NeverCoalesce,
)
from src.model.collision_kernel import ConstantKernel, ProductSumKernel
from src.utils.exceptions import ConfigError, StiffnessError


def _setup(kernel, probability, nu=0.0, n=20.0, cells=64):
    grid = build_grid(1e-4 * n, n, cells)
    distribution = PowerLawDistribution({"nu": nu})
    ws = OperatorWorkspace.build(grid, kernel, probability, distribution)
    return ws, project_initial(ExponentialInitial(), grid)


def _half_coalescing(n=20.0, cells=64):
    return _setup(
        ProductSumKernel({"alpha": 0.3, "beta": 0.7}),
        ConstantProbability({"e0": 0.5}),
        n=n,
        cells=cells,
    )


def _l1(first: NumberDensity, second: NumberDensity) -> float:
    return float(np.sum(np.abs(first.values - second.values) * first.grid.widths))


class TestTimeStepperConfig:
    def test_defaults_from_block(self):
        cfg = TimeStepperConfig.from_dict({"t_end": 1.0})
        assert cfg.method == "RK4"
        assert cfg.dt_init == pytest.approx(1e-2)
        assert cfg.dt_max == 1.0
        assert cfg.rel_tol == 1e-6
        assert cfg.adaptive

    def test_short_runs_start_small(self):
        cfg = TimeStepperConfig.from_dict({"t_end": 0.01})
        assert cfg.dt_init == pytest.approx(1e-3)

    def test_snapshots_sorted(self):
        cfg = TimeStepperConfig.from_dict({"t_end": 1.0, "snapshots": [0.5, 0.25]})
        assert cfg.snapshot_times == (0.25, 0.5)

    @pytest.mark.parametrize(
        "block",
        [
            {"t_end": 1.0, "method": "Midpoint"},
            {"t_end": -1.0},
            {"t_end": 1.0, "dt_min": 0.5, "dt_init": 0.1},
            {"t_end": 1.0, "snapshots": [2.0]},
            {"t_end": 1.0, "rel_tol": 0.0},
        ],
    )
    def test_invalid(self, block):
        with pytest.raises(ConfigError):
            TimeStepperConfig.from_dict(block)


def test_relative_drift():
    assert relative_drift(0.0, 0.0) == 0.0
    assert relative_drift(1.5, 1.0) == pytest.approx(0.5)


class TestStep:
    def test_zero_state(self):
        ws, _ = _half_coalescing()
        g = NumberDensity.zeros(ws.grid)
        new, report = step(g, ws, TimeStepperConfig(dt_init=0.1, dt_max=1.0))
        assert np.all(new.values == 0.0)
        assert report.mass_drift == 0.0
        assert report.negativity_clips == 0
        assert new.time == pytest.approx(0.1)

    def test_euler_reproduces_moment_ode(self):
        """Test dM0/dt = -M0^2 / 2 for constant-kernel coagulation"""
        ws, g0 = _setup(ConstantKernel({"c": 1.0}), AlwaysCoalesce(), n=50.0, cells=128)
        dt = 1e-4
        cfg = TimeStepperConfig(
            method="Euler", dt_init=dt, dt_min=dt, dt_max=dt, adaptive=False
        )
        new, report = step(g0, ws, cfg)
        m0 = moment(g0, 0)
        assert report.dt_used == dt
        assert (moment(new, 0) - m0) / dt == pytest.approx(-0.5 * m0**2, rel=1e-6)

    def test_binary_exchange_keeps_number(self):
        ws, g0 = _setup(ProductSumKernel({"alpha": 0.3, "beta": 0.7}), NeverCoalesce())
        new, report = step(g0, ws, TimeStepperConfig(dt_init=0.05, dt_max=1.0))
        assert moment(new, 0) == pytest.approx(moment(g0, 0), rel=1e-8)
        assert abs(report.mass_drift) <= 1e-10

    def test_growth_is_bounded(self):
        ws, g0 = _half_coalescing()
        cfg = TimeStepperConfig(dt_init=1e-3, dt_max=1.0)
        _, report = step(g0, ws, cfg)
        assert report.dt_next <= 2.0 * report.dt_used

    def test_stiffness_failure(self):
        ws, g0 = _setup(ConstantKernel({"c": 1e6}), AlwaysCoalesce())
        cfg = TimeStepperConfig(dt_init=0.5, dt_min=0.25, dt_max=1.0)
        with pytest.raises(StiffnessError) as excinfo:
            step(g0, ws, cfg)
        assert excinfo.value.state is g0


class TestRun:
    @pytest.fixture
    def coagulation(self):
        return _half_coalescing()

    def test_zero_horizon(self, coagulation):
        ws, g0 = coagulation
        result = run(g0, ws, TimeStepperConfig.from_dict({"t_end": 0.0}))
        assert len(result.series) == 1
        assert result.reports == []
        assert np.array_equal(result.final.values, g0.values)
        assert list(result.snapshots) == [0.0]

    def test_snapshots_land_exactly(self, coagulation):
        ws, g0 = coagulation
        cfg = TimeStepperConfig.from_dict({"t_end": 0.5, "snapshots": [0.1, 0.25]})
        result = run(g0, ws, cfg)
        assert sorted(result.snapshots) == [0.0, 0.1, 0.25, 0.5]
        for time, state in result.snapshots.items():
            assert state.time == time
        assert result.final.time == 0.5

    def test_series_records_every_step(self, coagulation):
        ws, g0 = coagulation
        result = run(g0, ws, TimeStepperConfig.from_dict({"t_end": 0.3}))
        frame = result.series.to_frame()
        assert list(frame.columns) == list(MomentSeries.COLUMNS)
        assert len(frame) == len(result.reports) + 1
        assert np.all(np.diff(frame["t"]) > 0)
        assert frame["mass_drift"].abs().max() <= 1e-6
        assert np.all(result.final.values >= 0)

    def test_deterministic(self, coagulation):
        ws, g0 = coagulation
        cfg = TimeStepperConfig.from_dict({"t_end": 0.2})
        first = run(g0, ws, cfg).series.to_frame()
        second = run(g0, ws, cfg).series.to_frame()
        assert first.equals(second)

    def test_abort_carries_partial_run(self):
        ws, g0 = _setup(ConstantKernel({"c": 1e6}), AlwaysCoalesce())
        cfg = TimeStepperConfig(dt_init=0.5, dt_min=0.25, dt_max=1.0, t_end=1.0)
        with pytest.raises(StiffnessError) as excinfo:
            run(g0, ws, cfg)
        assert len(excinfo.value.series) == 1
        assert 0.0 in excinfo.value.snapshots

    def test_rk4_order(self):
        """Test fixed-step RK4 errors shrink like dt^4"""
        ws, g0 = _half_coalescing(n=10.0, cells=32)

        def solve(dt):
            cfg = TimeStepperConfig(
                dt_init=dt, dt_min=dt, dt_max=dt, t_end=0.5, adaptive=False
            )
            return run(g0, ws, cfg).final

        reference = solve(0.5 / 80)
        coarse = _l1(solve(0.05), reference)
        fine = _l1(solve(0.025), reference)
        assert coarse / fine >= 12.0

    def test_tighter_tolerance_reduces_error(self):
        """Test the adaptive error tracks rel_tol as it is halved repeatedly"""
        ws, g0 = _half_coalescing(n=10.0, cells=32)

        def solve(rel_tol):
            cfg = TimeStepperConfig.from_dict({"t_end": 0.5, "rel_tol": rel_tol})
            return run(g0, ws, cfg)

        reference = solve(1e-12).final
        runs = [solve(1e-6 / 2**k) for k in range(5)]
        errors = [_l1(result.final, reference) for result in runs]
        steps = [len(result.reports) for result in runs]
        assert errors[-1] < 0.5 * errors[0]
        assert max(errors) <= 1e-2 * moment(g0, 0)
        assert steps[-1] > steps[0]
