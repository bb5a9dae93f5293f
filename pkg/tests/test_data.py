import numpy as np
import pytest

from stiefel_fs.data import Dataset, load_csv, one_hot, split, standardize
from stiefel_fs.errors import DataError, DataIOError


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_small_csv(tmp_path):
    p = write(tmp_path, "f1,f2,class\n1,2,a\n3,4,b\n5,6,a\n7,8,b\n")
    ds = load_csv(p, "class")
    assert (ds.d, ds.n, ds.k) == (2, 4, 2)
    assert ds.features.tolist() == [[1, 3, 5, 7], [2, 4, 6, 8]]
    assert ds.labels.tolist() == [0, 1, 0, 1]
    assert ds.metadata["label_mapping"] == {"a": 0, "b": 1}
    assert ds.feature_names == ["f1", "f2"]


def test_label_by_index_and_no_header(tmp_path):
    p = write(tmp_path, "2;1.5;0\n1;2.5;1\n2;0.5;1\n", "semi.csv")
    ds = load_csv(p, 0, delimiter=";", header=False)
    assert ds.d == 2 and ds.n == 3
    assert ds.labels.tolist() == [1, 0, 1]
    assert ds.feature_names is None


def test_numeric_labels_sorted_numerically(tmp_path):
    p = write(tmp_path, "x,y\n1,10\n2,9\n3,10\n")
    ds = load_csv(p, "y")
    assert ds.metadata["label_mapping"] == {"9": 0, "10": 1}


def test_nan_cell_reports_location(tmp_path):
    p = write(tmp_path, "f1,f2,class\n1,2,a\n3,NaN,b\n")
    with pytest.raises(DataError, match=r"row 3, column 2"):
        load_csv(p, "class")


def test_non_numeric_cell(tmp_path):
    p = write(tmp_path, "f1,class\nabc,a\n1,b\n")
    with pytest.raises(DataError, match="non-numeric"):
        load_csv(p, "class")


def test_ragged_row_is_io_error(tmp_path):
    p = write(tmp_path, "f1,f2,class\n1,2,a\n3,b\n")
    with pytest.raises(DataIOError, match="row 3"):
        load_csv(p, "class")


def test_single_label_rejected(tmp_path):
    p = write(tmp_path, "f1,class\n1,a\n2,a\n")
    with pytest.raises(DataError, match="2 distinct"):
        load_csv(p, "class")


def test_missing_file():
    with pytest.raises(DataIOError):
        load_csv("/nonexistent/file.csv")


def test_dataset_invariants():
    with pytest.raises(DataError):
        Dataset(np.ones((2, 3)), np.array([0, 0, 2]), n_classes=3)  # class 1 missing
    with pytest.raises(DataError):
        Dataset(np.ones((2, 1)), np.array([0]))
    with pytest.raises(DataError):
        Dataset(np.array([[1.0, np.inf]]), np.array([0, 1]))
    ds = Dataset(np.ones((2, 2)), np.array([0, 1]))
    with pytest.raises(ValueError):
        ds.features[0, 0] = 5.0


def test_standardize_examples():
    ds = Dataset(np.array([[1.0, 3.0, 2.0, 2.0], [5.0, 5.0, 5.0, 5.0]]), np.array([0, 1, 0, 1]))
    z = standardize(ds).features
    # mean 2, population std sqrt(0.5)
    s = np.sqrt(0.5)
    assert np.allclose(z[0], [-1 / s, 1 / s, 0, 0], atol=1e-15)
    assert z[1].tolist() == [0, 0, 0, 0]
    two = standardize(Dataset(np.array([[1.0, 3.0]]), np.array([0, 1]))).features
    assert two.tolist() == [[-1.0, 1.0]]


def test_standardize_idempotent_and_keeps_original_constants(rng):
    ds = Dataset(rng.normal(3, 2, (4, 50)), np.arange(50) % 2)
    once = standardize(ds)
    twice = standardize(once)
    assert np.max(np.abs(once.features - twice.features)) <= 1e-12
    assert np.allclose(once.features.mean(axis=1), 0, atol=1e-12)
    assert np.allclose(once.features.std(axis=1), 1, atol=1e-12)
    assert twice.metadata["standardization"]["mean"] == ds.features.mean(axis=1).tolist()


def test_one_hot():
    Y = one_hot(Dataset(np.ones((1, 3)), np.array([0, 1, 0]))).matrix
    assert Y.tolist() == [[1, 0, 1], [0, 1, 0]]
    Y = one_hot(Dataset(np.ones((1, 3)), np.array([2, 0, 1]))).matrix
    assert sorted(map(tuple, Y.T.tolist())) == sorted(map(tuple, np.eye(3).tolist()))


def test_one_hot_sums(rng):
    labels = rng.integers(0, 5, 200)
    labels[:5] = np.arange(5)
    Y = one_hot(Dataset(np.ones((1, 200)), labels)).matrix
    assert np.all(Y.sum(axis=0) == 1)
    assert Y.sum() == 200


def _balanced(n, k=2):
    return Dataset(np.arange(n, dtype=float)[None, :], np.arange(n) % k)


def test_split_small_balanced():
    sp = split(_balanced(10), 7)
    assert len(sp.train) == 7 and len(sp.test) == 3
    ds = _balanced(10)
    assert set(ds.labels[sp.train]) == {0, 1}
    assert set(ds.labels[sp.test]) == {0, 1}
    assert sorted(np.concatenate([sp.train, sp.test]).tolist()) == list(range(10))


def test_split_deterministic_and_seed_sensitive():
    ds = _balanced(100, 3)
    a, b = split(ds, 11), split(ds, 11)
    assert a.train.tolist() == b.train.tolist()
    parts = {tuple(split(ds, s).train.tolist()) for s in range(20)}
    assert len(parts) == 20


@pytest.mark.parametrize("n,k", [(1000, 2), (1000, 7), (2310, 7), (13, 3), (47, 5)])
def test_split_size(n, k):
    sp = split(_balanced(n, k), 0)
    assert len(sp.train) == (7 * n + 5) // 10
    assert not set(sp.train) & set(sp.test)


def test_split_stratified_fractions():
    labels = np.array([0] * 80 + [1] * 20)
    ds = Dataset(np.zeros((1, 100)), labels)
    sp = split(ds, 3)
    assert np.sum(labels[sp.train] == 0) == 56
    assert np.sum(labels[sp.train] == 1) == 14


def test_split_errors():
    with pytest.raises(DataError):
        split(_balanced(8), 0)
    labels = np.array([0] * 11 + [1])
    with pytest.raises(DataError, match="class 1"):
        split(Dataset(np.zeros((1, 12)), labels), 0)


def test_metadata_sidecar(tmp_path):
    p = write(tmp_path, "f1,class\n1,a\n2,b\n")
    ds = standardize(load_csv(p, "class"))
    ds.write_metadata(tmp_path / "meta.json")
    import json

    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["label_mapping"] == {"a": 0, "b": 1}
    assert meta["standardization"]["mean"] == [1.5]
