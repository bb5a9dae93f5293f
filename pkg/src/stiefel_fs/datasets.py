"""Seeded synthetic datasets used by tests, the benchmark and examples."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Union

import numpy as np

from .data import Dataset


def make_blobs(n: int = 100, d: int = 2, k: int = 2, separation: float = 6.0, seed: int = 0) -> Dataset:
    """Isotropic Gaussian clusters with centres ``separation`` apart."""
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % k
    rng.shuffle(labels)
    centres = np.zeros((d, k))
    for c in range(k):
        centres[c % d, c] = separation * (1 if c < d else -1)
    X = centres[:, labels] + rng.standard_normal((d, n))
    return Dataset(X, labels, n_classes=k)


def make_planted(
    n: int = 400,
    n_informative: int = 5,
    n_noise: int = 15,
    k: int = 3,
    signal: float = 1.0,
    seed: int = 0,
) -> Dataset:
    """Class-mean shifts on the first ``n_informative`` features, pure noise elsewhere.

    Informative feature ``i`` shifts class ``c`` by ``signal * mu[i, c]`` with
    ``mu`` drawn standard normal, so every informative feature separates some
    pair of classes.
    """
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % k
    rng.shuffle(labels)
    d = n_informative + n_noise
    X = rng.standard_normal((d, n))
    mu = rng.standard_normal((n_informative, k))
    X[:n_informative] += signal * mu[:, labels]
    names = [f"inf{i}" for i in range(n_informative)] + [f"noise{i}" for i in range(n_noise)]
    return Dataset(X, labels, names, k)


def make_classification(n: int, d: int, k: int, n_informative: int = None, seed: int = 0) -> Dataset:
    """Correlated features with class structure on a random subset of directions.

    Used for shape-faithful stand-ins of the public benchmark tables.
    """
    rng = np.random.default_rng(seed)
    n_informative = n_informative or max(1, d // 3)
    labels = np.arange(n) % k
    rng.shuffle(labels)
    Z = rng.standard_normal((d, n))
    Z[:n_informative] += 1.5 * rng.standard_normal((n_informative, k))[:, labels]
    mix = np.eye(d) + 0.3 * rng.standard_normal((d, d)) / np.sqrt(d)
    X = mix @ Z
    perm = rng.permutation(d)
    return Dataset(X[perm], labels, n_classes=k)


def make_regression_problem(d: int, k: int, n: int, seed: int = 0):
    """Standardized class-structured features and one-hot labels ``(X, Y)``."""
    ds = make_classification(n, d, k, seed=seed)
    X = ds.features
    X = (X - X.mean(axis=1, keepdims=True)) / X.std(axis=1, keepdims=True)
    Y = np.zeros((k, n))
    Y[ds.labels, np.arange(n)] = 1.0
    return X, Y


def write_csv(ds: Dataset, path: Union[str, Path], label_name: str = "class") -> None:
    """One row per sample, features first, label last, with header."""
    names = ds.names()
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + [label_name])
        for j in range(ds.n):
            w.writerow([repr(float(v)) for v in ds.features[:, j]] + [int(ds.labels[j])])
