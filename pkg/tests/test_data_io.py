import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcboost.data_io import (
    DataError,
    Dataset,
    SplitSpec,
    load_csv,
    load_libsvm,
    save_csv,
    split,
    split_indices,
    train_test_split,
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestDataset:
    def test_labels_must_be_signed(self):
        with pytest.raises(DataError, match="invalid label"):
            Dataset(np.zeros((2, 1)), np.array([0, 1]))

    def test_rejects_nan(self):
        with pytest.raises(DataError, match="non-finite"):
            Dataset(np.array([[np.nan], [1.0]]), np.array([1, -1]))

    def test_arrays_are_read_only(self):
        data = Dataset(np.zeros((2, 1)), np.array([1, -1]))
        with pytest.raises(ValueError):
            data.features[0, 0] = 1.0

    def test_constructor_copies_input(self):
        X = np.zeros((2, 1))
        data = Dataset(X, np.array([1, -1]))
        X[0, 0] = 5.0
        assert data.features[0, 0] == 0.0

    def test_check_trainable(self):
        with pytest.raises(DataError, match="single-class"):
            Dataset(np.zeros((3, 1)), np.array([1, 1, 1])).check_trainable()
        with pytest.raises(DataError, match="at least 2"):
            Dataset(np.zeros((1, 1)), np.array([1])).check_trainable()


class TestLoadCsv:
    def test_three_rows(self, tmp_path):
        path = write(tmp_path, "a.csv", "0.1,2,1\n0.2,3,-1\n0.3,4,1\n")
        data = load_csv(path)
        assert data.n_examples == 3
        np.testing.assert_array_equal(data.labels, [1, -1, 1])
        np.testing.assert_array_equal(data.features, [[0.1, 2], [0.2, 3], [0.3, 4]])

    def test_zero_one_labels_remapped(self, tmp_path):
        path = write(tmp_path, "a.csv", "1,0\n2,1\n3,0\n")
        np.testing.assert_array_equal(load_csv(path).labels, [-1, 1, -1])

    def test_label_two_rejected(self, tmp_path):
        path = write(tmp_path, "a.csv", "1,1\n2,2\n3,-1\n")
        with pytest.raises(DataError, match="invalid label"):
            load_csv(path)

    def test_header_and_named_label(self, tmp_path):
        path = write(tmp_path, "a.csv", "y,a,b\n1,0.5,7\n-1,0.25,8\n")
        data = load_csv(path, label_column="y")
        assert data.feature_names == ("a", "b")
        np.testing.assert_array_equal(data.labels, [1, -1])
        np.testing.assert_array_equal(data.features[:, 1], [7, 8])

    def test_label_index(self, tmp_path):
        path = write(tmp_path, "a.csv", "1,0.5\n-1,0.25\n")
        data = load_csv(path, label_column=0)
        np.testing.assert_array_equal(data.features[:, 0], [0.5, 0.25])

    def test_non_numeric_cell_reports_location(self, tmp_path):
        path = write(tmp_path, "a.csv", "a,b,y\n1,2,1\n3,oops,-1\n")
        with pytest.raises(DataError, match=r"line 3, column 1"):
            load_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="missing"):
            load_csv(tmp_path / "nope.csv")

    def test_single_class_rejected(self, tmp_path):
        path = write(tmp_path, "a.csv", "1,1\n2,1\n")
        with pytest.raises(DataError, match="single-class"):
            load_csv(path)

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        data = Dataset(rng.normal(size=(20, 3)), rng.choice([-1, 1], size=20))
        save_csv(data, tmp_path / "r.csv")
        again = load_csv(tmp_path / "r.csv")
        np.testing.assert_array_equal(again.features, data.features)
        np.testing.assert_array_equal(again.labels, data.labels)


class TestLoadLibsvm:
    def test_sparse_row(self, tmp_path):
        path = write(tmp_path, "a.svm", "+1 1:0.5 3:2.0\n-1 2:1\n")
        data = load_libsvm(path)
        np.testing.assert_array_equal(data.features[0], [0.5, 0.0, 2.0])
        assert data.labels[0] == 1

    def test_empty_feature_list(self, tmp_path):
        path = write(tmp_path, "a.svm", "+1 2:3\n−1\n")
        data = load_libsvm(path)
        np.testing.assert_array_equal(data.features[1], [0.0, 0.0])
        assert data.labels[1] == -1

    def test_decreasing_indices(self, tmp_path):
        path = write(tmp_path, "a.svm", "+1 3:1 1:2\n")
        with pytest.raises(DataError, match="indices not increasing"):
            load_libsvm(path)

    def test_malformed_entry_reports_line(self, tmp_path):
        path = write(tmp_path, "a.svm", "+1 1:1\n-1 2=3\n")
        with pytest.raises(DataError, match="line 2"):
            load_libsvm(path)


class TestSplit:
    def test_sizes(self):
        assert SplitSpec(0.6, 0.2, 0.2).sizes(10) == (6, 2, 2)
        assert SplitSpec(0.1, 0.3, 0.6).sizes(100) == (10, 30, 60)

    def test_fractions_must_sum_to_one(self):
        with pytest.raises(DataError):
            SplitSpec(0.5, 0.2, 0.2)

    def test_same_seed_same_partition(self):
        labels = np.tile([1, -1], 25)
        a = split_indices(labels, SplitSpec(seed=11))
        b = split_indices(labels, SplitSpec(seed=11))
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    def test_every_part_has_both_classes(self):
        labels = np.array([1] * 45 + [-1] * 5)
        rng = np.random.default_rng(0)
        data = Dataset(rng.normal(size=(50, 2)), labels)
        for part in split(data, SplitSpec(seed=4)):
            assert set(part.labels.tolist()) == {-1, 1}

    def test_impossible_split_errors(self):
        labels = np.array([1] * 19 + [-1])
        with pytest.raises(DataError, match="both classes"):
            split_indices(labels, SplitSpec(max_retries=5))

    @settings(max_examples=60, deadline=None)
    @given(n=st.integers(20, 200), seed=st.integers(0, 2**63 - 1))
    def test_partition_is_disjoint_and_exhaustive(self, n, seed):
        labels = np.where(np.arange(n) % 2 == 0, 1, -1)
        parts = split_indices(labels, SplitSpec(seed=seed))
        joined = np.concatenate(parts)
        assert joined.size == n
        np.testing.assert_array_equal(np.sort(joined), np.arange(n))

    def test_train_test_split(self):
        rng = np.random.default_rng(1)
        data = Dataset(rng.normal(size=(30, 2)), np.tile([1, -1], 15))
        tr, te = train_test_split(data, 0.6, seed=2)
        assert (tr.n_examples, te.n_examples) == (18, 12)
