"""Loop kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``STIEFEL_FS_DISABLE_NUMBA`` is unset or ``0``.  Both paths are
always importable under explicit names so they can be tested against each
other and benchmarked.

Dense linear algebra (Gram products, SVD retraction) is BLAS-bound and stays
in numpy; only the loop-shaped work lives here.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised via the env flag instead
    numba = None


def _numba_requested() -> bool:
    flag = os.environ.get("STIEFEL_FS_DISABLE_NUMBA", "0").strip().lower()
    return flag in ("", "0", "false", "no")


HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _numba_requested()


# ---------------------------------------------------------------------------
# trapezoid sums over unit-spaced samples
# ---------------------------------------------------------------------------


def trapezoid_rows_numpy(y):
    """Trapezoid integral of each row of ``y`` with unit x-spacing."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape[1] < 2:
        return np.zeros(y.shape[0])
    return 0.5 * (y[:, :-1] + y[:, 1:]).sum(axis=1)


def _trapezoid_rows_loop(y):
    m, n = y.shape
    out = np.zeros(m)
    for i in range(m):
        acc = 0.0
        for j in range(n - 1):
            acc += 0.5 * (y[i, j] + y[i, j + 1])
        out[i] = acc
    return out


# ---------------------------------------------------------------------------
# k-nearest-neighbour vote
# ---------------------------------------------------------------------------


def knn_vote_numpy(x_train, labels, x_test, k, n_classes):
    """Majority vote among the ``k`` nearest training columns.

    Columns are samples.  Neighbour order is by distance, then training index.
    Vote ties go to the class with the smallest mean neighbour distance, then
    to the smallest class index.
    """
    x_train = np.ascontiguousarray(x_train, dtype=np.float64)
    x_test = np.ascontiguousarray(x_test, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    m = x_test.shape[1]
    out = np.empty(m, dtype=np.int64)
    # chunk over test points to bound the distance matrix size
    chunk = max(1, 4_000_000 // max(1, x_train.shape[0] * x_train.shape[1]))
    for lo in range(0, m, chunk):
        hi = min(m, lo + chunk)
        diff = x_test[:, lo:hi, None] - x_train[:, None, :]
        dist = np.sqrt(np.einsum("dij,dij->ij", diff, diff))
        order = np.argsort(dist, axis=1, kind="stable")[:, :k]
        nd = np.take_along_axis(dist, order, axis=1)
        nl = labels[order]
        counts = np.zeros((hi - lo, n_classes))
        dsum = np.zeros((hi - lo, n_classes))
        rows = np.repeat(np.arange(hi - lo), k)
        np.add.at(counts, (rows, nl.ravel()), 1.0)
        np.add.at(dsum, (rows, nl.ravel()), nd.ravel())
        best = counts.max(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            mean = np.where(counts == best, dsum / counts, np.inf)
        out[lo:hi] = np.argmin(mean, axis=1)
    return out


def _knn_vote_loop(train_rows, labels, test_rows, k, n_classes):
    # rows are samples here (transposed from the public column layout)
    n, d = train_rows.shape
    m = test_rows.shape[0]
    out = np.empty(m, dtype=np.int64)
    dist = np.empty(n)
    counts = np.zeros(n_classes)
    dsum = np.zeros(n_classes)
    for t in range(m):
        for j in range(n):
            acc = 0.0
            for r in range(d):
                diff = test_rows[t, r] - train_rows[j, r]
                acc += diff * diff
            dist[j] = np.sqrt(acc)
        order = np.argsort(dist, kind="mergesort")
        counts[:] = 0.0
        dsum[:] = 0.0
        for q in range(k):
            j = order[q]
            counts[labels[j]] += 1.0
            dsum[labels[j]] += dist[j]
        best_c = -1
        best_count = -1.0
        best_mean = np.inf
        for c in range(n_classes):
            if counts[c] == 0.0:
                continue
            mean = dsum[c] / counts[c]
            if counts[c] > best_count or (counts[c] == best_count and mean < best_mean):
                best_c = c
                best_count = counts[c]
                best_mean = mean
        out[t] = best_c
    return out


if HAVE_NUMBA:
    trapezoid_rows_numba = numba.njit(cache=True)(_trapezoid_rows_loop)
    _knn_vote_jit = numba.njit(cache=True)(_knn_vote_loop)

    def knn_vote_numba(x_train, labels, x_test, k, n_classes):
        return _knn_vote_jit(
            np.ascontiguousarray(np.asarray(x_train, dtype=np.float64).T),
            np.ascontiguousarray(labels, dtype=np.int64),
            np.ascontiguousarray(np.asarray(x_test, dtype=np.float64).T),
            int(k),
            int(n_classes),
        )

else:  # pragma: no cover
    trapezoid_rows_numba = None
    knn_vote_numba = None


def trapezoid_rows(y):
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.ndim != 2:
        raise ValueError("expected a 2-D array")
    if USE_NUMBA:
        return trapezoid_rows_numba(y)
    return trapezoid_rows_numpy(y)


def knn_vote(x_train, labels, x_test, k, n_classes):
    if USE_NUMBA:
        return knn_vote_numba(x_train, labels, x_test, k, n_classes)
    return knn_vote_numpy(x_train, labels, x_test, k, n_classes)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
