"""Dataset container, CSV ingestion, standardization, label encoding, splits.

Features are stored features-in-rows: ``features`` has shape ``(d, n)``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np

from .errors import DataError, DataIOError

TRAIN_FRACTION_NUM = 7
TRAIN_FRACTION_DEN = 10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with integer class labels.

    Parameters
    ----------
    features : ndarray, shape (d, n)
        One row per feature, one column per sample.
    labels : ndarray of int, shape (n,)
        Dense class codes in ``[0, n_classes)``.
    feature_names : list of str, optional
    n_classes : int, optional
        Inferred from ``labels`` when omitted.
    metadata : dict
        Free-form provenance: label mapping, standardization constants.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: Optional[list] = None
    n_classes: Optional[int] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels)
        if X.ndim != 2:
            raise DataError(f"features must be 2-D (d x n), got shape {X.shape}")
        if y.ndim != 1 or y.shape[0] != X.shape[1]:
            raise DataError(
                f"labels must be a vector of length n={X.shape[1]}, got shape {y.shape}"
            )
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise DataError("labels must be integers")
        y = y.astype(np.int64)
        d, n = X.shape
        if d < 1:
            raise DataError("dataset needs at least one feature")
        if n < 2:
            raise DataError("dataset needs at least two samples")
        bad = np.argwhere(~np.isfinite(X))
        if bad.size:
            i, j = bad[0]
            raise DataError(f"non-finite value in feature {i}, sample {j}")
        k = self.n_classes if self.n_classes is not None else int(y.max()) + 1
        if k < 2:
            raise DataError("dataset needs at least two classes")
        if y.min() < 0 or y.max() >= k:
            raise DataError(f"labels must lie in [0, {k})")
        missing = np.setdiff1d(np.arange(k), y)
        if missing.size:
            raise DataError(f"classes with no samples: {missing.tolist()}")
        names = self.feature_names
        if names is not None:
            names = [str(s) for s in names]
            if len(names) != d:
                raise DataError(f"expected {d} feature names, got {len(names)}")
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "labels", _frozen(y))
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "n_classes", int(k))
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def d(self) -> int:
        return self.features.shape[0]

    @property
    def n(self) -> int:
        return self.features.shape[1]

    @property
    def k(self) -> int:
        return self.n_classes

    def names(self) -> list:
        if self.feature_names is not None:
            return list(self.feature_names)
        return [f"f{i}" for i in range(self.d)]

    def select_features(self, idx: Sequence[int]) -> "Dataset":
        idx = list(idx)
        names = None if self.feature_names is None else [self.feature_names[i] for i in idx]
        return Dataset(self.features[idx], self.labels, names, self.n_classes, self.metadata)

    def write_metadata(self, path: Union[str, Path]) -> None:
        """Write the metadata dict as a JSON sidecar."""
        Path(path).write_text(json.dumps(_jsonable(self.metadata), indent=2, sort_keys=True))


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


@dataclass(frozen=True)
class OneHotLabels:
    """Label indicator matrix of shape ``(k, n)``."""

    matrix: np.ndarray

    @property
    def k(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    test: np.ndarray
    seed: int


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------


def _sort_label_values(values):
    try:
        as_num = {v: float(v) for v in values}
    except ValueError:
        return sorted(values)
    return sorted(values, key=lambda v: (as_num[v], v))


def load_csv(
    path: Union[str, Path],
    label_column: Union[str, int] = -1,
    *,
    delimiter: str = ",",
    header: bool = True,
) -> Dataset:
    """Read a CSV table with one sample per row.

    ``label_column`` is a header name or a (possibly negative) column index;
    an integer-looking string is treated as an index when it does not match
    a header name.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh, delimiter=delimiter))
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    except (csv.Error, UnicodeDecodeError) as exc:
        raise DataIOError(f"{path}: parse failure: {exc}") from exc

    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise DataIOError(f"{path}: empty file")
    first_line = 1
    if header:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        first_line = 2
    else:
        names = None
    if not rows:
        raise DataIOError(f"{path}: no data rows")
    width = len(names) if names is not None else len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DataIOError(
                f"{path}: row {i + first_line} has {len(r)} columns, expected {width}"
            )

    col = _resolve_column(label_column, names, width)
    feat_cols = [c for c in range(width) if c != col]
    if not feat_cols:
        raise DataError(f"{path}: no feature columns besides the label")

    X = np.empty((len(feat_cols), len(rows)))
    raw_labels = []
    for i, r in enumerate(rows):
        raw_labels.append(r[col].strip())
        for fi, c in enumerate(feat_cols):
            cell = r[c].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric value {cell!r} at row {i + first_line}, column {c + 1}"
                ) from None
            if not math.isfinite(v):
                raise DataError(
                    f"{path}: non-finite value {cell!r} at row {i + first_line}, column {c + 1}"
                )
            X[fi, i] = v

    distinct = _sort_label_values(set(raw_labels))
    if len(distinct) < 2:
        raise DataError(f"{path}: need at least 2 distinct labels, found {len(distinct)}")
    mapping = {v: i for i, v in enumerate(distinct)}
    labels = np.array([mapping[v] for v in raw_labels], dtype=np.int64)
    feat_names = [names[c] for c in feat_cols] if names is not None else None
    meta = {
        "source": str(path),
        "label_column": names[col] if names is not None else col,
        "label_mapping": {v: i for v, i in mapping.items()},
    }
    return Dataset(X, labels, feat_names, len(distinct), meta)


def _resolve_column(sel, names, width) -> int:
    if names is not None and isinstance(sel, str) and sel in names:
        return names.index(sel)
    try:
        idx = int(sel)
    except (TypeError, ValueError):
        raise DataError(f"label column {sel!r} not found") from None
    if not -width <= idx < width:
        raise DataError(f"label column index {idx} out of range for {width} columns")
    return idx % width


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------


def standardize(ds: Dataset) -> Dataset:
    """Z-score each feature row (population std); constant rows become zero."""
    X = ds.features
    mean = X.mean(axis=1)
    std = X.std(axis=1)
    const = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    safe = np.where(const, 1.0, std)
    Z = (X - mean[:, None]) / safe[:, None]
    Z[const] = 0.0
    meta = dict(ds.metadata)
    prior = meta.get("standardization")
    record = {"mean": mean.tolist(), "std": std.tolist()}
    meta["standardization"] = record if prior is None else prior
    return Dataset(Z, ds.labels, ds.feature_names, ds.n_classes, meta)


def one_hot(ds: Dataset) -> OneHotLabels:
    Y = np.zeros((ds.n_classes, ds.n))
    Y[ds.labels, np.arange(ds.n)] = 1.0
    Y.flags.writeable = False
    return OneHotLabels(Y)


def split(ds: Dataset, seed: int) -> SplitIndices:
    """Stratified 70/30 train/test partition.

    The train size is ``round(0.7 * n)`` (half rounds up).  Each class gets
    its floor share, the leftover slots go to classes with the largest
    fractional share, and every class keeps at least one sample on each side.
    """
    n = ds.n
    if n < 10:
        raise DataError(f"split needs at least 10 samples, got {n}")
    counts = np.bincount(ds.labels, minlength=ds.n_classes)
    if counts.min() < 2:
        bad = int(np.argmin(counts))
        raise DataError(f"class {bad} has {counts[bad]} sample(s); stratified split needs 2")
    n_train = (TRAIN_FRACTION_NUM * n + TRAIN_FRACTION_DEN // 2) // TRAIN_FRACTION_DEN

    exact = counts * TRAIN_FRACTION_NUM / TRAIN_FRACTION_DEN
    alloc = np.clip(np.floor(exact).astype(np.int64), 1, counts - 1)
    frac = exact - np.floor(exact)
    # largest remainder, ties by class index
    order = np.lexsort((np.arange(len(counts)), -frac))
    # second pass lets a class give up its last test sample when the
    # per-class floor cannot otherwise reach the 70% total
    for cap in (counts - 1, counts):
        while alloc.sum() < n_train:
            progressed = False
            for c in order:
                if alloc.sum() >= n_train:
                    break
                if alloc[c] < cap[c]:
                    alloc[c] += 1
                    progressed = True
            if not progressed:
                break
    while alloc.sum() > n_train:
        progressed = False
        for c in order[::-1]:
            if alloc.sum() <= n_train:
                break
            if alloc[c] > 1:
                alloc[c] -= 1
                progressed = True
        if not progressed:
            break

    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in range(ds.n_classes):
        members = np.flatnonzero(ds.labels == c)
        perm = rng.permutation(members)
        train.append(perm[: alloc[c]])
        test.append(perm[alloc[c]:])
    train = np.sort(np.concatenate(train))
    test = np.sort(np.concatenate(test))
    return SplitIndices(train, test, int(seed))
