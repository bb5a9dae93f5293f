"""Backward elimination along a feature ranking, scored by held-out accuracy."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import _kernels
from .data import Dataset, split
from .errors import ConfigError, DataError, NumericalError
from .scoring import FeatureRanking
from .seeding import EVAL_STREAM, derive_seed

CLASSIFIERS = ("linear", "knn")


@dataclass(frozen=True)
class EvalConfig:
    n_trials: int = 20
    classifier: str = "linear"
    knn_k: int = 5
    ridge: float = 1e-3
    elimination_schedule: Optional[Sequence[int]] = None
    base_seed: int = 0
    paired: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.classifier not in CLASSIFIERS:
            raise ConfigError(f"classifier must be one of {CLASSIFIERS}, got {self.classifier!r}")
        if self.knn_k < 1:
            raise ConfigError("knn_k must be >= 1")
        if self.ridge < 0:
            raise ConfigError("ridge must be >= 0")
        if self.elimination_schedule is not None:
            s = list(self.elimination_schedule)
            if not s:
                raise ConfigError("elimination schedule is empty")
            if any(b >= a for a, b in zip(s, s[1:])):
                raise ConfigError(f"subset sizes must be strictly decreasing, got {s}")
            if s[-1] < 1:
                raise ConfigError("subset sizes must be >= 1")
            object.__setattr__(self, "elimination_schedule", tuple(int(v) for v in s))


@dataclass
class EvalCurve:
    points: List[tuple] = field(default_factory=list)  # (size, mean_acc, std_acc)
    best_size: int = 0
    best_accuracy: float = 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["subset_size", "mean_acc", "std_acc"])
        for s, m, sd in self.points:
            w.writerow([s, repr(float(m)), repr(float(sd))])
        return buf.getvalue()

    def accuracy_at(self, size: int) -> float:
        for s, m, _ in self.points:
            if s == size:
                return m
        raise KeyError(size)


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray  # (d, k)
    bias: np.ndarray  # (k,)

    def scores(self, X) -> np.ndarray:
        return self.weights.T @ X + self.bias[:, None]

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.scores(X), axis=0)


def train_linear(X_train, Y_train, ridge: float = 1e-3) -> LinearModel:
    """One-vs-rest ridge least squares with an unpenalized bias.

    Minimizes ``||W^T X + b 1^T - Y||^2 + ridge ||W||^2`` for ``X`` (d x n)
    and one-hot ``Y`` (k x n).
    """
    X = np.asarray(X_train, dtype=np.float64)
    Y = np.asarray(getattr(Y_train, "matrix", Y_train), dtype=np.float64)
    if np.count_nonzero(Y.sum(axis=1)) < 2:
        raise DataError("training data must contain at least 2 classes")
    xm = X.mean(axis=1, keepdims=True)
    ym = Y.mean(axis=1, keepdims=True)
    Xc = X - xm
    Yc = Y - ym
    M = Xc @ Xc.T
    if ridge > 0:
        M[np.diag_indices_from(M)] += ridge
    elif np.linalg.matrix_rank(M) < M.shape[0]:
        raise NumericalError("singular normal equations with ridge = 0; use ridge > 0 (default 1e-3)")
    try:
        W = np.linalg.solve(M, Xc @ Yc.T)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"ridge system is singular: {exc}; increase ridge") from exc
    b = (ym - W.T @ xm).ravel()
    return LinearModel(W, b)


def knn_predict(X_train, labels_train, X_test, k: int = 5, n_classes: Optional[int] = None):
    """Euclidean k-NN majority vote; columns are samples.

    Ties go to the smallest mean neighbour distance, then the smallest class.
    """
    labels_train = np.asarray(labels_train, dtype=np.int64)
    n_train = labels_train.shape[0]
    if not 1 <= k <= n_train:
        raise ConfigError(f"k={k} must lie in [1, n_train={n_train}]")
    if n_classes is None:
        n_classes = int(labels_train.max()) + 1
    return _kernels.knn_vote(X_train, labels_train, X_test, k, n_classes)


def default_schedule(d: int) -> List[int]:
    """``d, d-1, ..., 1`` for ``d <= 64``; 32 geometric sizes otherwise."""
    if d < 1:
        raise ConfigError("d must be >= 1")
    if d <= 64:
        return list(range(d, 0, -1))
    # widen the raw geometric grid until 32 distinct integer sizes survive rounding
    for m in range(32, 10 * d):
        sizes = sorted({int(round(v)) for v in np.geomspace(d, 1, m)}, reverse=True)
        if len(sizes) >= 32:
            break
    if len(sizes) > 32:
        # keep endpoints, thin the interior evenly
        keep = np.unique(np.round(np.linspace(0, len(sizes) - 1, 32)).astype(int))
        sizes = [sizes[i] for i in keep]
    return sizes


def _accuracy(ds: Dataset, feats, train, test, cfg: EvalConfig) -> float:
    X = ds.features[feats]
    Xtr, Xte = X[:, train], X[:, test]
    ytr, yte = ds.labels[train], ds.labels[test]
    if cfg.classifier == "linear":
        Y = np.zeros((ds.n_classes, ytr.size))
        Y[ytr, np.arange(ytr.size)] = 1.0
        pred = train_linear(Xtr, Y, cfg.ridge).predict(Xte)
    else:
        pred = knn_predict(Xtr, ytr, Xte, min(cfg.knn_k, ytr.size), ds.n_classes)
    return float(np.mean(pred == yte))


def backward_eliminate(ds: Dataset, ranking: FeatureRanking, cfg: Optional[EvalConfig] = None) -> EvalCurve:
    """Accuracy of the top-``s`` ranked features for each size in the schedule.

    Trial ``t`` uses the split seeded by ``derive_seed(base_seed, 1, t)``,
    shared across all subset sizes in paired mode.
    """
    cfg = cfg or EvalConfig()
    order = ranking.order
    if sorted(order) != list(range(ds.d)):
        raise DataError(f"ranking covers {len(order)} features, dataset has {ds.d}")
    schedule = list(cfg.elimination_schedule or default_schedule(ds.d))
    if schedule[0] > ds.d:
        raise ConfigError(f"subset size {schedule[0]} exceeds d={ds.d}")

    paired_splits = None
    if cfg.paired:
        paired_splits = [split(ds, derive_seed(cfg.base_seed, EVAL_STREAM, t)) for t in range(cfg.n_trials)]

    def evaluate(size):
        feats = order[:size]
        accs = []
        for t in range(cfg.n_trials):
            if paired_splits is not None:
                sp = paired_splits[t]
            else:
                sp = split(ds, derive_seed(cfg.base_seed, EVAL_STREAM, t, size))
            accs.append(_accuracy(ds, feats, sp.train, sp.test, cfg))
        a = np.array(accs)
        return (int(size), float(a.mean()), float(a.std()))

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
            points = list(ex.map(evaluate, schedule))
    else:
        points = [evaluate(s) for s in schedule]

    best = max(points, key=lambda pt: (pt[1], -pt[0]))
    return EvalCurve(points, best[0], best[1])
