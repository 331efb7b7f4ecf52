import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from concept_forge.dataset import (Dataset, DatasetError, DescriptionSpacePartition, PreferenceSet, load_dataset,
                                   load_partition, load_preferences, normalize, partition_features, save_csv,
                                   save_json, save_partition)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadDataset:
    def test_csv_round_trip(self, tmp_path):
        d = Dataset(np.array([[0.1, 2.0], [1 / 3, -4.5]]), ("a", "b"))
        save_csv(d, tmp_path / "d.csv")
        back = load_dataset(tmp_path / "d.csv")
        assert back.feature_names == ("a", "b")
        np.testing.assert_array_equal(back.samples, d.samples)

    def test_json_round_trip(self, tmp_path):
        d = Dataset(np.array([[1.0, 2.0, 3.0]]), ("x", "y", "z"))
        save_json(d, tmp_path / "d.json")
        back = load_dataset(tmp_path / "d.json")
        np.testing.assert_array_equal(back.samples, d.samples)

    def test_json_list_of_objects(self, tmp_path):
        p = write(tmp_path, "d.json", json.dumps([{"u": 1, "v": 2}, {"u": 3, "v": 4}]))
        d = load_dataset(p)
        assert d.feature_names == ("u", "v")
        np.testing.assert_array_equal(d.samples, [[1, 2], [3, 4]])

    def test_bad_cell_reports_row_and_column(self, tmp_path):
        p = write(tmp_path, "d.csv", "drag,lift\n1,2\n3,4\n5,abc\n")
        with pytest.raises(DatasetError) as err:
            load_dataset(p)
        assert err.value.row == 4 and err.value.column == "lift"
        assert "row 4" in str(err.value) and "'lift'" in str(err.value)

    @pytest.mark.parametrize("text", ["a,b\n1,2\n3\n", "a,a\n1,2\n", ""])
    def test_malformed_csv(self, tmp_path, text):
        with pytest.raises(DatasetError):
            load_dataset(write(tmp_path, "d.csv", text))

    def test_non_finite_rejected(self, tmp_path):
        with pytest.raises(DatasetError):
            load_dataset(write(tmp_path, "d.csv", "a\nnan\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError):
            load_dataset(tmp_path / "nope.csv")

    def test_single_row(self, tmp_path):
        d = load_dataset(write(tmp_path, "d.csv", "a,b\n1,2\n"))
        assert d.n_samples == 1


class TestNormalize:
    def test_hand_computed(self):
        d = normalize(Dataset(np.array([[0.0, 5.0], [10.0, 5.0], [5.0, 5.0]]), ("a", "b")))
        np.testing.assert_allclose(d.samples, [[0.0, 0.5], [1.0, 0.5], [0.5, 0.5]])
        assert d.normalization == ((0.0, 10.0), (5.0, 5.0))

    def test_idempotent(self):
        d = normalize(Dataset(np.random.default_rng(0).normal(size=(20, 3)), ("a", "b", "c")))
        assert normalize(d) is d

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 4)),
                  elements=st.floats(-1e6, 1e6, allow_nan=False)))
    def test_unit_range_and_order(self, x):
        d = normalize(Dataset(x, tuple(f"f{j}" for j in range(x.shape[1]))))
        assert d.samples.min() >= 0.0 and d.samples.max() <= 1.0
        # min-max scaling is monotone per feature (weakly, after rounding)
        lt = x[:, None, :] < x[None, :, :]
        y = d.samples
        assert np.all((y[:, None, :] <= y[None, :, :])[lt])


class TestPartition:
    @pytest.fixture
    def d(self):
        return Dataset(np.zeros((2, 5)), ("a", "b", "c", "d", "e"))

    def test_groups_and_remainder(self, d):
        p = partition_features(d, [["c", "a"], ["d"]])
        assert p.spaces == ((2, 0), (3,))
        assert p.remainder == (1, 4)
        assert p.dims == (2, 1)
        assert p.space_slice(1) == slice(2, 3)

    def test_overlap_rejected(self, d):
        with pytest.raises(DatasetError):
            partition_features(d, [["a", "b"], ["b"]])

    def test_unknown_feature(self, d):
        with pytest.raises(DatasetError):
            partition_features(d, [["zz"]])

    def test_empty_space_rejected(self):
        with pytest.raises(DatasetError):
            DescriptionSpacePartition(((0,), ()))

    def test_inline_and_file(self, d, tmp_path):
        inline = load_partition("a,b;e", d)
        save_partition(inline, tmp_path / "p.json")
        assert load_partition(tmp_path / "p.json", d) == inline

    def test_project_orders_by_space(self):
        d = Dataset(np.array([[1.0, 2.0, 3.0]]), ("a", "b", "c"))
        p = partition_features(d, [["c"], ["a"]])
        np.testing.assert_array_equal(p.project(d), [[3.0, 1.0]])


class TestPreferences:
    def test_sorted_and_validated(self, tmp_path):
        p = write(tmp_path, "p.json", "[4, 1]")
        prefs = load_preferences(p)
        assert prefs.indices == (1, 4)
        with pytest.raises(DatasetError):
            prefs.validate(Dataset(np.zeros((3, 1)), ("a",)))

    @pytest.mark.parametrize("text", ["[1, 1]", "[-1]", "[1.5]", "{}"])
    def test_invalid(self, tmp_path, text):
        with pytest.raises(DatasetError):
            load_preferences(write(tmp_path, "p.json", text))

    def test_empty_set(self):
        assert len(PreferenceSet()) == 0
