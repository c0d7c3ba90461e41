import os

import numpy as np
import pandas as pd
import pytest

from src.data.initial_conditions import ExponentialInitial, TabulatedInitial
from src.data.snapshot_store import SCHEMA_HEADER, SnapshotStore
from src.engine.grid import build_grid, moment, project_initial


class TestSnapshotStore:
    @pytest.fixture
    def store(self, tmp_path):
        return SnapshotStore(str(tmp_path / "run"))

    @pytest.fixture
    def state(self):
        grid = build_grid(1e-3, 20.0, 64)
        return project_initial(ExponentialInitial(), grid)

    def test_creates_layout(self, store):
        assert os.path.isdir(os.path.join(store.output_dir, "snapshots"))

    def test_schema_header(self, store):
        path = store.save_table(pd.DataFrame({"a": [1.0]}), "table.csv")
        with open(path, encoding="utf-8") as handle:
            assert handle.readline().strip() == SCHEMA_HEADER
        assert list(SnapshotStore.read_csv(path).columns) == ["a"]

    def test_snapshot_name_and_columns(self, store, state):
        state.time = 0.5
        path = store.save_state(state)
        assert os.path.basename(path) == "t0.5.csv"
        frame = SnapshotStore.load_snapshot(path)
        assert list(frame.columns) == ["time", "pivot", "density"]
        assert (frame["time"] == 0.5).all()

    def test_snapshot_reproduces_moments(self, store, state):
        """Test a snapshot fed back as a tabulated initial condition"""
        path = store.save_state(state)
        restored = project_initial(TabulatedInitial.from_csv(path), state.grid)
        for r in (0, 1, 2):
            assert moment(restored, r) == pytest.approx(moment(state, r), rel=1e-12)
        np.testing.assert_array_equal(restored.values, state.values)

    def test_floats_read_back_bit_for_bit(self, store, state):
        frame = SnapshotStore.load_snapshot(store.save_state(state))
        np.testing.assert_array_equal(frame["pivot"].to_numpy(), state.grid.pivots)
        np.testing.assert_array_equal(frame["density"].to_numpy(), state.values)

    def test_state_outside_snapshots(self, store, state):
        path = store.save_state(state, "abort_state.csv", directory="")
        assert path == os.path.join(store.output_dir, "", "abort_state.csv")
        assert os.path.isfile(os.path.join(store.output_dir, "abort_state.csv"))

    def test_load_snapshot_requires_columns(self, store):
        path = store.save_table(pd.DataFrame({"pivot": [1.0]}), "broken.csv")
        with pytest.raises(ValueError):
            SnapshotStore.load_snapshot(path)
