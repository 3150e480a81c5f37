import numpy as np
import pytest

from motiongp.geometry import Trajectory, normalize, to_polar
from motiongp.windows import build_dataset, window_at


def trace_of_length(n, seed=0):
    rng = np.random.default_rng(seed)
    points = np.cumsum(rng.normal(0, 0.05, (n, 2)), axis=0)
    points[0] = 0.0
    return normalize(to_polar(Trajectory.from_positions(points, 20.0)))


class TestBuildDataset:
    def test_sample_count_and_input_length(self):
        ds = build_dataset(trace_of_length(12), window=10)
        assert len(ds) == 2
        assert ds.inputs.shape == (2, 60)
        assert ds.targets.shape == (2, 3)

    def test_boundary_two_samples(self):
        ds = build_dataset(trace_of_length(7), window=5)
        assert len(ds) == 2

    def test_too_short_trace(self):
        with pytest.raises(ValueError, match="trace too short for window"):
            build_dataset(trace_of_length(11), window=10)

    def test_constant_tail_gives_zero_increment_targets(self):
        # One moving point bypasses the degenerate guard; the rest is pauses.
        points = np.zeros((9, 2))
        points[1:] = [1.0, 0.0]
        trace = normalize(to_polar(Trajectory.from_positions(points, 20.0)))
        ds = build_dataset(trace, window=3)
        assert np.all(ds.targets == 0.0)

    def test_targets_equal_feature_increments_exactly(self):
        trace = trace_of_length(25, seed=3)
        ds = build_dataset(trace, window=6)
        for i in range(len(ds)):
            k = 6 + i
            assert np.array_equal(ds.targets[i], trace.xi[k] - trace.xi[k - 1])

    def test_input_components_bounded(self):
        ds = build_dataset(trace_of_length(40, seed=4), window=8)
        assert np.all(ds.inputs >= -1.0) and np.all(ds.inputs <= 1.0)
        absolute = ds.inputs.reshape(len(ds), 8, 6)[:, :, :3]
        # Absolute parts of all but the zeroed first record are in [0, 1].
        assert np.all(absolute >= 0.0) and np.all(absolute <= 1.0)

    def test_samples_are_indexable(self):
        ds = build_dataset(trace_of_length(15), window=4)
        sample = ds[1]
        assert sample.input.shape == (24,)
        assert sample.target.shape == (3,)


class TestWindowAt:
    def test_first_window_leads_with_zero_record(self):
        trace = trace_of_length(20)
        row = window_at(trace, k=5, window=5)
        assert np.all(row[:6] == 0.0)

    def test_window_shifts_by_one_record(self):
        trace = trace_of_length(20)
        row = window_at(trace, k=6, window=5)
        assert np.allclose(row[:6], trace.zeta[1])

    def test_leading_entries_match_record(self):
        trace = trace_of_length(20, seed=2)
        for k in [7, 11, 15]:
            row = window_at(trace, k, window=6)
            assert np.array_equal(row[:6], trace.zeta[k - 6])

    def test_underflow(self):
        with pytest.raises(ValueError, match="window underflow"):
            window_at(trace_of_length(20), k=3, window=5)

    def test_shift_consistency(self):
        trace = trace_of_length(30, seed=5)
        w = 7
        for k in range(w, 20):
            row = window_at(trace, k, w)
            nxt = window_at(trace, k + 1, w)
            assert np.array_equal(nxt[:-6], row[6:])
            assert np.array_equal(nxt[-6:], trace.zeta[k])

    def test_dataset_rows_match_window_at(self):
        trace = trace_of_length(18, seed=6)
        ds = build_dataset(trace, window=5)
        for i in range(len(ds)):
            assert np.array_equal(ds.inputs[i], window_at(trace, 5 + i, 5))
