"""
Unit tests for well-log data: synthetic generation, table I/O, splitting,
standardization and batch assembly.
"""

import numpy as np
import pytest
from structlog.testing import capture_logs

from indisup.app.core.errors import (
    EmptyWellError,
    InsufficientWellsError,
    NotFittedError,
    TableParseError,
    WindowError,
)
from indisup.app.services.data import (
    Dataset,
    generate_synthetic_field,
    load_table,
    make_batches,
    split_wells,
    write_table,
)
from indisup.app.services.data.table import TABLE_COLUMNS
from indisup.app.services.physics import SonicSample, dynamic_youngs_modulus

HEADER = ",".join(TABLE_COLUMNS)


def _write_rows(path, rows):
    path.write_text(HEADER + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


# ─── Synthetic generator ──────────────────────────────────────────────────────

class TestSyntheticField:

    @pytest.mark.unit
    def test_same_seed_same_field(self):
        a = generate_synthetic_field(seed=11, n_wells=3, samples_per_well=300)
        b = generate_synthetic_field(seed=11, n_wells=3, samples_per_well=300)
        assert a == b

    @pytest.mark.unit
    def test_different_seed_different_field(self):
        a = generate_synthetic_field(seed=11, n_wells=3, samples_per_well=300)
        b = generate_synthetic_field(seed=12, n_wells=3, samples_per_well=300)
        assert a != b

    @pytest.mark.unit
    def test_shape_and_ids(self):
        ds = generate_synthetic_field(seed=0, n_wells=5, samples_per_well=250)
        assert ds.well_ids == ["W001", "W002", "W003", "W004", "W005"]
        assert ds.total_samples == 5 * 250

    @pytest.mark.unit
    def test_every_sample_is_physically_valid(self, small_field):
        for w in small_field.wells:
            e = dynamic_youngs_modulus(SonicSample(w.density, w.dts, w.dtp))
            assert np.all(e > 0)
            assert np.all(w.dts >= 1.6 * w.dtp - 1e-12)

    @pytest.mark.unit
    def test_inputs_linearly_predict_modulus(self):
        ds = generate_synthetic_field(seed=0, n_wells=8, samples_per_well=1000)
        X = np.concatenate([w.inputs() for w in ds.wells])
        y = np.concatenate([w.dynamic_modulus() for w in ds.wells])
        A = np.column_stack([X, np.ones(len(X))])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        r2 = 1.0 - np.sum((A @ coef - y) ** 2) / np.sum((y - y.mean()) ** 2)
        assert r2 >= 0.5

    @pytest.mark.unit
    def test_layered_structure(self):
        """Neighbouring samples share a layer far more often than random pairs."""
        w = generate_synthetic_field(seed=2, n_wells=2, samples_per_well=2000).wells[0]
        lag1 = np.corrcoef(w.dtp[:-1], w.dtp[1:])[0, 1]
        assert lag1 > 0.8

    @pytest.mark.unit
    @pytest.mark.parametrize("n_wells,samples", [(1, 500), (3, 100)])
    def test_rejects_tiny_fields(self, n_wells, samples):
        with pytest.raises(ValueError):
            generate_synthetic_field(seed=0, n_wells=n_wells, samples_per_well=samples)


# ─── Table I/O ────────────────────────────────────────────────────────────────

class TestTable:

    @pytest.mark.unit
    def test_round_trip(self, tmp_path, small_field):
        path = write_table(small_field, tmp_path / "field.csv")
        loaded = load_table(path)
        assert loaded == small_field
        assert loaded.rejections == ()

    @pytest.mark.unit
    def test_writes_are_byte_identical(self, tmp_path, small_field):
        a = write_table(small_field, tmp_path / "a.csv").read_bytes()
        b = write_table(small_field, tmp_path / "b.csv").read_bytes()
        assert a == b
        assert a.startswith((HEADER + "\n").encode())

    @pytest.mark.unit
    def test_unsorted_well_is_sorted_with_warning(self, tmp_path):
        path = _write_rows(tmp_path / "t.csv", [
            "A,10.0,2.4,10,50,1.3,0.7",
            "A,9.0,2.4,10,50,1.3,0.7",
            "A,11.0,2.5,12,55,1.35,0.7",
        ])
        with capture_logs() as logs:
            ds = load_table(path)
        np.testing.assert_array_equal(ds.well("A").depth, [9.0, 10.0, 11.0])
        assert any(entry["event"] == "well_depth_not_monotone" for entry in logs)

    @pytest.mark.unit
    def test_invalid_row_rejected_and_reported(self, tmp_path):
        path = _write_rows(tmp_path / "t.csv", [
            "A,1.0,2.4,10,50,1.3,0.7",
            "A,2.0,2.4,10,50,0.7,0.7",
            "A,3.0,2.4,10,50,1.3,0.7",
        ])
        ds = load_table(path)
        assert len(ds.well("A")) == 2
        assert len(ds.rejections) == 1
        assert ds.rejections[0].line == 3
        assert ds.rejections[0].well_id == "A"

    @pytest.mark.unit
    def test_repeated_depth_rejected(self, tmp_path):
        path = _write_rows(tmp_path / "t.csv", [
            "A,1.0,2.4,10,50,1.3,0.7",
            "A,1.0,2.5,10,50,1.3,0.7",
            "A,2.0,2.4,10,50,1.3,0.7",
        ])
        ds = load_table(path)
        assert len(ds.well("A")) == 2
        assert [r.reason for r in ds.rejections] == ["repeated depth"]

    @pytest.mark.unit
    def test_invalid_row_does_not_shadow_its_depth_twin(self, tmp_path):
        path = _write_rows(tmp_path / "t.csv", [
            "A,1.0,2.4,10,50,0.7,0.7",
            "A,1.0,2.5,10,50,1.3,0.7",
            "A,2.0,2.4,10,50,1.3,0.7",
        ])
        ds = load_table(path)
        np.testing.assert_array_equal(ds.well("A").depth, [1.0, 2.0])
        assert ds.well("A").density[0] == 2.5
        assert [(r.line, r.reason) for r in ds.rejections] == [(2, "outside physics validity region")]

    @pytest.mark.unit
    def test_nan_depth_in_unsorted_well(self, tmp_path):
        path = _write_rows(tmp_path / "t.csv", [
            "A,3.0,2.4,10,50,1.3,0.7",
            "A,nan,2.4,10,50,1.3,0.7",
            "A,1.0,2.4,10,50,1.3,0.7",
            "A,2.0,2.4,10,50,1.3,0.7",
        ])
        ds = load_table(path)
        np.testing.assert_array_equal(ds.well("A").depth, [1.0, 2.0, 3.0])
        assert [r.line for r in ds.rejections] == [3]

    @pytest.mark.unit
    def test_parse_error_carries_line_number(self, tmp_path):
        path = _write_rows(tmp_path / "t.csv", [
            "A,1.0,2.4,10,50,1.3,0.7",
            "A,2.0,abc,10,50,1.3,0.7",
        ])
        with pytest.raises(TableParseError) as exc_info:
            load_table(path)
        assert exc_info.value.line == 3

    @pytest.mark.unit
    def test_wrong_header(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("well,depth\nA,1.0\n", encoding="utf-8")
        with pytest.raises(TableParseError):
            load_table(path)

    @pytest.mark.unit
    def test_well_without_valid_rows(self, tmp_path):
        path = _write_rows(tmp_path / "t.csv", [
            "A,1.0,2.4,10,50,1.3,0.7",
            "B,1.0,2.4,10,50,0.7,0.7",
        ])
        with pytest.raises(EmptyWellError):
            load_table(path)


# ─── Splitting and standardization ────────────────────────────────────────────

class TestSplit:

    @pytest.mark.unit
    def test_full_field_counts(self):
        ds = generate_synthetic_field(seed=0, n_wells=39, samples_per_well=200)
        train, test = split_wells(ds, 0.7, seed=0)
        assert (len(train), len(test)) == (27, 12)

    @pytest.mark.unit
    def test_partition_and_determinism(self, small_field):
        train, test = split_wells(small_field, 0.5, seed=4)
        again_train, _ = split_wells(small_field, 0.5, seed=4)
        assert train.well_ids == again_train.well_ids
        assert not set(train.well_ids) & set(test.well_ids)
        assert sorted(train.well_ids + test.well_ids) == small_field.well_ids

    @pytest.mark.unit
    def test_two_wells_half(self):
        ds = generate_synthetic_field(seed=0, n_wells=2, samples_per_well=200)
        train, test = split_wells(ds, 0.5, seed=0)
        assert (len(train), len(test)) == (1, 1)

    @pytest.mark.unit
    def test_insufficient_wells(self):
        ds = generate_synthetic_field(seed=0, n_wells=2, samples_per_well=200)
        with pytest.raises(InsufficientWellsError):
            split_wells(ds, 0.9, seed=0)

    @pytest.mark.unit
    def test_training_inputs_are_standardized(self, small_field):
        train, _ = split_wells(small_field, 0.5, seed=0)
        train = train.fit_standardization()
        X = np.concatenate([train.standardized_inputs(w) for w in train.wells])
        np.testing.assert_allclose(X.mean(axis=0), 0.0, atol=0.01)
        np.testing.assert_allclose(X.std(axis=0), 1.0, atol=0.01)

    @pytest.mark.unit
    def test_test_side_uses_training_moments(self, small_field):
        train, test = split_wells(small_field, 0.5, seed=0)
        train = train.fit_standardization()
        leaked = test.fit_standardization()
        held_out = test.with_standardization(train.standardization)
        w = test.wells[0]
        assert not np.allclose(held_out.standardized_inputs(w), leaked.standardized_inputs(w))

    @pytest.mark.unit
    def test_unfitted_standardization(self, small_field):
        with pytest.raises(NotFittedError):
            small_field.standardized_inputs(small_field.wells[0])


# ─── Batches ──────────────────────────────────────────────────────────────────

class TestBatches:

    @pytest.mark.unit
    def test_full_size_batch(self, small_field):
        ds = small_field.fit_standardization()
        batch = next(make_batches(ds, batch_size=128, seq_len=150, seed=0))
        assert batch.X.shape == (128, 150, 4)
        assert batch.n == 19_200

    @pytest.mark.unit
    def test_labels_and_inputs_come_from_the_same_samples(self, small_field):
        ds = small_field.fit_standardization()
        batch = next(make_batches(ds, batch_size=16, seq_len=30, seed=1))
        e = batch.e.reshape(16, 30)
        for row, (wid, start) in enumerate(zip(batch.well_ids, batch.starts)):
            w = ds.well(wid)
            window = slice(int(start), int(start) + 30)
            raw = SonicSample(w.density[window], w.dts[window], w.dtp[window])
            np.testing.assert_allclose(e[row], dynamic_youngs_modulus(raw), rtol=1e-14)
            np.testing.assert_array_equal(batch.X[row], ds.standardized_inputs(w)[window])

    @pytest.mark.unit
    def test_single_sample_windows(self, small_field):
        ds = small_field.fit_standardization()
        batch = next(make_batches(ds, batch_size=8, seq_len=1, seed=0))
        assert batch.X.shape == (8, 1, 4)
        assert batch.n == 8

    @pytest.mark.unit
    def test_same_seed_same_stream(self, small_field):
        ds = small_field.fit_standardization()
        a, b = make_batches(ds, 4, 10, seed=9), make_batches(ds, 4, 10, seed=9)
        for _ in range(5):
            x, y = next(a), next(b)
            np.testing.assert_array_equal(x.X, y.X)
            assert x.well_ids == y.well_ids

    @pytest.mark.unit
    def test_windows_stay_inside_wells(self, small_field):
        ds = small_field.fit_standardization()
        stream = make_batches(ds, 64, 200, seed=3)
        for _ in range(10):
            batch = next(stream)
            assert np.all(batch.starts >= 0)
            assert np.all(batch.starts + 200 <= 240)

    @pytest.mark.unit
    def test_window_longer_than_shortest_well(self, small_field):
        with pytest.raises(WindowError):
            make_batches(small_field.fit_standardization(), 4, 241, seed=0)

    @pytest.mark.unit
    def test_requires_standardization(self, small_field):
        with pytest.raises(NotFittedError):
            make_batches(small_field, 4, 10, seed=0)

    @pytest.mark.unit
    def test_dataset_rejects_duplicate_ids(self, small_field):
        with pytest.raises(ValueError):
            Dataset(wells=(small_field.wells[0], small_field.wells[0]))
