import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evtad.errors import DataError
from evtad.series import (ErrorSeries, SplitSpec, TimeSeries, absolute_errors,
                          load_csv, make_windows, split, split_bounds)


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_three_rows(self, tmp_path):
        path = _write(tmp_path, "t,v\n1,5.0\n2,6.0\n3,4.0\n")
        series, rejected = load_csv(path, timestamp_col="t", value_col="v")
        assert len(series) == 3
        assert rejected == 0
        assert series.labels == frozenset()
        np.testing.assert_array_equal(series.values, [5.0, 6.0, 4.0])

    def test_nan_row_rejected_with_count(self, tmp_path):
        path = _write(tmp_path, "timestamp,value\n1,5.0\n2,NaN\n3,4.0\n")
        series, rejected = load_csv(path)
        assert len(series) == 2
        assert rejected == 1

    def test_inf_rejected(self, tmp_path):
        path = _write(tmp_path, "timestamp,value\n1,inf\n2,4.0\n")
        series, rejected = load_csv(path)
        assert rejected == 1 and len(series) == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_csv(tmp_path / "nope.csv")

    def test_unparseable_value(self, tmp_path):
        path = _write(tmp_path, "timestamp,value\n1,abc\n")
        with pytest.raises(DataError, match="unparseable value"):
            load_csv(path)

    def test_unparseable_timestamp(self, tmp_path):
        path = _write(tmp_path, "timestamp,value\nnot-a-time,1.0\n")
        with pytest.raises(DataError, match="unparseable timestamp"):
            load_csv(path)

    def test_empty_result(self, tmp_path):
        path = _write(tmp_path, "timestamp,value\n")
        with pytest.raises(DataError, match="no usable rows"):
            load_csv(path)

    def test_iso_timestamps_normalized(self, tmp_path):
        path = _write(tmp_path,
                      "timestamp,value\n2015-09-08 11:30:00,1.0\n2015-09-08 11:35:00,2.0\n")
        series, _ = load_csv(path)
        assert series.timestamps[1] - series.timestamps[0] == 300

    def test_non_increasing_timestamp_rejected(self, tmp_path):
        path = _write(tmp_path, "timestamp,value\n5,1.0\n5,2.0\n4,3.0\n9,4.0\n")
        series, rejected = load_csv(path)
        assert rejected == 2
        np.testing.assert_array_equal(series.timestamps, [5, 9])

    def test_labels(self, tmp_path):
        path = _write(tmp_path, "timestamp,value,label\n1,5.0,0\n2,6.0,1\n3,4.0,0\n")
        series, _ = load_csv(path)
        assert series.labels == frozenset({1})

    def test_bad_label_value(self, tmp_path):
        path = _write(tmp_path, "timestamp,value,label\n1,5.0,maybe\n")
        with pytest.raises(DataError, match="label"):
            load_csv(path)

    def test_missing_column(self, tmp_path):
        path = _write(tmp_path, "time,value\n1,5.0\n")
        with pytest.raises(DataError, match="missing column"):
            load_csv(path)


class TestTimeSeries:
    def test_label_out_of_range(self):
        with pytest.raises(DataError, match="label index"):
            TimeSeries(np.arange(3), np.ones(3), frozenset({5}))

    def test_non_finite_values(self):
        with pytest.raises(DataError, match="finite"):
            TimeSeries(np.arange(2), np.array([1.0, np.nan]))

    def test_segment_rebases_labels(self):
        ts = TimeSeries(np.arange(10), np.arange(10.0), frozenset({7}))
        seg = ts.segment(5, 10)
        assert seg.labels == frozenset({2})


class TestSplit:
    def test_length_10(self):
        ts = TimeSeries(np.arange(10), np.arange(10.0))
        tr, va, te = split(ts, SplitSpec(0.6, 0.2, 0.2))
        assert (len(tr), len(va), len(te)) == (6, 2, 2)

    def test_anomaly_in_training_segment(self):
        ts = TimeSeries(np.arange(10), np.arange(10.0), frozenset({2}))
        with pytest.raises(DataError, match="anomaly in training segment"):
            split(ts, SplitSpec(0.6, 0.2, 0.2))

    def test_occupancy_sized_split_matches_floor_oracle(self):
        # independent oracle: integer-floor the two leading segments,
        # remainder to the last
        n = 2382
        spec = SplitSpec(0.5, 0.25, 0.25)
        expect = (math.floor(n * 0.5), math.floor(n * 0.25))
        expect = (expect[0], expect[1], n - sum(expect))
        ts = TimeSeries(np.arange(n), np.random.default_rng(0).normal(size=n))
        tr, va, te = split(ts, spec)
        assert (len(tr), len(va), len(te)) == expect == (1191, 595, 596)

    def test_fractions_must_sum_to_one(self):
        with pytest.raises(DataError, match="sum to 1"):
            SplitSpec(0.5, 0.2, 0.2)

    def test_too_short(self):
        ts = TimeSeries(np.arange(2), np.arange(2.0))
        with pytest.raises(DataError, match="too short"):
            split(ts, SplitSpec())

    @given(n=st.integers(3, 400), a=st.integers(1, 98))
    @settings(max_examples=60, deadline=None)
    def test_concat_reconstructs_series(self, n, a):
        b = (100 - a) // 2
        spec = SplitSpec(a / 100, b / 100, (100 - a - b) / 100)
        values = np.sin(np.arange(n, dtype=float))
        labels = frozenset({n - 1})
        ts = TimeSeries(np.arange(n), values, labels)
        i, j = split_bounds(n, spec)
        if i == 0:
            return
        tr, va, te = split(ts, spec)
        np.testing.assert_array_equal(
            np.concatenate([tr.values, va.values, te.values]), values)
        np.testing.assert_array_equal(
            np.concatenate([tr.timestamps, va.timestamps, te.timestamps]),
            ts.timestamps)
        rebased = set(tr.labels) | {k + i for k in va.labels} | {k + j for k in te.labels}
        assert rebased == set(labels)


class TestMakeWindows:
    def test_enumeration(self):
        ts = TimeSeries(np.arange(4), np.array([1.0, 2.0, 3.0, 4.0]))
        w = make_windows(ts, 2, 1)
        np.testing.assert_array_equal(w.inputs, [[1, 2], [2, 3]])
        np.testing.assert_array_equal(w.targets, [[3], [4]])
        np.testing.assert_array_equal(w.origin_indices, [2, 3])

    def test_count_formula(self):
        ts = TimeSeries(np.arange(100), np.random.default_rng(1).normal(size=100))
        assert len(make_windows(ts, 8, 5)) == 100 - 8 - 5 + 1 == 88

    def test_too_short(self):
        ts = TimeSeries(np.arange(5), np.arange(5.0))
        with pytest.raises(DataError, match="too short"):
            make_windows(ts, 4, 2)

    @given(n=st.integers(4, 60), lb=st.integers(1, 10), la=st.integers(1, 10))
    @settings(max_examples=60, deadline=None)
    def test_windows_tile_series(self, n, lb, la):
        if n < lb + la:
            return
        values = np.random.default_rng(n).normal(size=n)
        ts = TimeSeries(np.arange(n), values)
        w = make_windows(ts, lb, la)
        assert len(w) == n - lb - la + 1
        for k in range(len(w)):
            o = w.origin_indices[k]
            np.testing.assert_array_equal(w.inputs[k], values[o - lb:o])
            np.testing.assert_array_equal(w.targets[k], values[o:o + la])


class TestAbsoluteErrors:
    def test_arithmetic(self):
        es = absolute_errors([3.0, 5.0], [2.5, 6.0])
        np.testing.assert_allclose(es.errors, [0.5, 1.0])

    def test_identity(self):
        es = absolute_errors([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert np.all(es.errors == 0)

    def test_signs(self):
        es = absolute_errors([-1.0, 2.0], [1.0, -2.0])
        np.testing.assert_allclose(es.errors, [2.0, 4.0])

    def test_length_mismatch(self):
        with pytest.raises(DataError, match="mismatch"):
            absolute_errors([1.0], [1.0, 2.0])

    def test_horizon_selection(self):
        actual = np.array([[1.0, 10.0], [2.0, 20.0]])
        pred = np.array([[1.5, 12.0], [2.5, 16.0]])
        np.testing.assert_allclose(absolute_errors(actual, pred, 0).errors, [0.5, 0.5])
        np.testing.assert_allclose(absolute_errors(actual, pred, 1).errors, [2.0, 4.0])

    @given(st.lists(st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)),
                    min_size=1, max_size=40))
    @settings(max_examples=80, deadline=None)
    def test_symmetric_in_arguments(self, pairs):
        a = np.array([p[0] for p in pairs])
        b = np.array([p[1] for p in pairs])
        np.testing.assert_array_equal(absolute_errors(a, b).errors,
                                      absolute_errors(b, a).errors)


class TestErrorSeries:
    def test_negative_error_rejected(self):
        with pytest.raises(DataError, match="non-negative"):
            ErrorSeries(np.array([0, 1]), np.array([0.5, -0.1]))

    def test_indices_strictly_increase(self):
        with pytest.raises(DataError, match="strictly increase"):
            ErrorSeries(np.array([1, 1]), np.array([0.5, 0.5]))

    def test_restrict(self):
        es = ErrorSeries(np.array([2, 5, 9]), np.array([1.0, 2.0, 3.0]))
        sub = es.restrict(3, 9)
        np.testing.assert_array_equal(sub.indices, [5])
