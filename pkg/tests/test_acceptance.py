"""Exit criteria. Each test records one PASS/FAIL line, printed in the terminal summary.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import json
import time

import numpy as np
import pytest

from conftest import random_stiefel
from stiefel_fs.cli import main
from stiefel_fs.data import one_hot, standardize
from stiefel_fs.datasets import make_classification, make_planted, make_regression_problem, write_csv
from stiefel_fs.evaluation import EvalConfig, backward_eliminate
from stiefel_fs.objective import build_problem, gradient, objective_direct, orthonormality_error
from stiefel_fs.optimizer import (
    SearchConfig,
    SimplexWeights,
    direction_components,
    hybrid_direction,
    minimize,
    retract,
    tangency_error,
)
from stiefel_fs.scoring import QuadrantWeights, build_polygon, polygon_area, quadrant_process, rank_features
from stiefel_fs.search import build_grid, curve_area, sweep

RESULTS = []


def record(name, ok, detail):
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, detail


def polar_factor(Q):
    lam, V = np.linalg.eigh(Q.T @ Q)
    return Q @ (V / np.sqrt(lam)) @ V.T


# ---------------------------------------------------------------------------
# 1 + 5: fifty seeded runs, shared
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def fifty_runs():
    rng = np.random.default_rng(2024)
    runs = []
    t0 = time.perf_counter()
    for i in range(50):
        d = int(rng.integers(2, 51))
        k = int(rng.integers(1, min(d, 10) + 1))
        n = int(rng.integers(max(20, d), 400))
        X = rng.standard_normal((d, n)) * rng.uniform(0.2, 3.0, (d, 1))
        labels = rng.integers(0, k, n)
        X[: min(4, d)] += rng.standard_normal((min(4, d), k))[:, labels]
        Y = np.zeros((k, n))
        Y[labels, np.arange(n)] = 1.0
        p = build_problem(X, Y)
        a = rng.uniform(0.01, 0.98)
        b = rng.uniform(0.01, 0.99 - a)
        w = SimplexWeights(a, b, 1.0 - a - b)
        errs = []
        W, tr = minimize(p, w, SearchConfig(seed=i), callback=lambda m, W, f: errs.append(orthonormality_error(W)))
        runs.append((tr, errs))
    return runs, time.perf_counter() - t0


def test_c1_orthogonality(fifty_runs):
    runs, elapsed = fifty_runs
    worst = max(max(errs) for _, errs in runs)
    n_iter = sum(len(errs) for _, errs in runs)
    ok = worst <= 1e-8 and elapsed <= 60
    record("C1 orthogonality", ok, f"max ||W^T W - I||_F = {worst:.2e} over {n_iter} iterates, {elapsed:.1f}s")


def test_c5_envelope(fifty_runs):
    runs, _ = fifty_runs
    conv = [tr for tr, _ in runs if tr.converged]
    bad_env = 0
    bad_grad = 0
    for tr in conv:
        C = np.array(tr.c_values)
        # a few ulps of slack for the weighted-average rounding
        if np.any(C[1:] > C[:-1] * (1 + 4 * np.finfo(float).eps)):
            bad_env += 1
        if tr.grad_norms[-1] > tr.eps_grad:
            bad_grad += 1
    ok = bool(conv) and bad_env == 0 and bad_grad == 0
    record("C5 envelope", ok, f"{len(conv)}/50 converged; envelope violations {bad_env}, gradient-norm violations {bad_grad}")


# ---------------------------------------------------------------------------
# 2, 3, 4, 6
# ---------------------------------------------------------------------------


def test_c2_tangency():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 40))
        k = int(rng.integers(1, d + 1))
        W = random_stiefel(d, k, rng)
        G = rng.standard_normal((d, k)) * rng.uniform(0.1, 10)
        x = rng.dirichlet(np.ones(3)) * 0.97 + 0.01
        w = SimplexWeights(x[0], x[1], 1.0 - x[0] - x[1])
        for F in (hybrid_direction(W, G, w), *direction_components(W, G)):
            worst = max(worst, tangency_error(W, F))
    record("C2 tangency", worst <= 1e-10, f"max ||W^T F + F^T W||_F = {worst:.2e}")


def test_c3_gradient():
    rng = np.random.default_rng(3)
    worst = 0.0
    h = 1e-6
    for _ in range(20):
        d = int(rng.integers(2, 9))
        k = int(rng.integers(1, d + 1))
        n = 40
        labels = np.arange(n) % k
        X = rng.standard_normal((d, n))
        p = build_problem(X, np.eye(k)[labels].T)
        W = random_stiefel(d, k, rng)
        G = gradient(p, W)
        fd = np.zeros_like(W)
        for i in range(d):
            for j in range(k):
                E = np.zeros_like(W)
                E[i, j] = h
                fd[i, j] = (objective_direct(p, W + E) - objective_direct(p, W - E)) / (2 * h)
        worst = max(worst, np.max(np.abs(G - fd)) / np.max(np.abs(fd)))
    record("C3 gradient", worst <= 1e-5, f"max relative error vs central differences = {worst:.2e}")


def test_c4_retraction():
    rng = np.random.default_rng(4)
    worst = 0.0
    beaten = 0
    for _ in range(50):
        d = int(rng.integers(1, 20))
        k = int(rng.integers(1, d + 1))
        Q = rng.standard_normal((d, k))
        R = retract(Q)
        worst = max(worst, np.max(np.abs(R - polar_factor(Q))))
        dist = np.linalg.norm(R - Q)
        beaten += all(dist <= np.linalg.norm(random_stiefel(d, k, rng) - Q) + 1e-12 for _ in range(50))
    ok = worst <= 1e-10 and beaten == 50
    record("C4 retraction", ok, f"max |retract - polar| = {worst:.2e}; nearest in {beaten}/50 trials")


def test_c6_polygon_identity():
    rng = np.random.default_rng(6)
    worst = 0.0
    for k in (2, 3, 4, 7):
        rows = np.abs(rng.standard_normal((100, k)))
        wq = QuadrantWeights(rows)
        for j in range(100):
            worst = max(worst, abs(polygon_area(build_polygon(wq, j)) - rows[j].sum()))
    exact = polygon_area(build_polygon(QuadrantWeights(np.array([[1.0, 2.0, 3.0]])), 0))
    ok = worst <= 1e-12 and exact == 6.0
    record("C6 polygon area", ok, f"max |area - row sum| = {worst:.2e}; (1,2,3) -> {exact}")


# ---------------------------------------------------------------------------
# 7: hybrid vs plain descent-curve area
# ---------------------------------------------------------------------------

C7_SHAPES = [(18, 4, 846), (19, 7, 2310), (36, 2, 3196), (60, 6, 600),
             (256, 10, 2007), (320, 10, 1404), (423, 10, 1500), (512, 10, 1484)]


def test_c7_hybrid_vs_plain():
    t0 = time.perf_counter()
    grid = build_grid(0.1)
    wins = 0
    rows = []
    for i, (d, k, n) in enumerate(C7_SHAPES):
        X, Y = make_regression_problem(d, k, n, seed=100 + i)
        p = build_problem(X, Y)
        cfg = SearchConfig(seed=i)
        hybrid = sweep(p, grid, cfg).best_point.area
        _, tr = minimize(p, None, SearchConfig(seed=i, mode="plain"))
        plain = curve_area(tr)
        wins += hybrid <= plain
        rows.append(f"({d},{k}) {hybrid:.2f}/{plain:.2f}")
    elapsed = time.perf_counter() - t0
    ok = wins >= 6 and elapsed <= 300
    record("C7 hybrid<=plain", ok, f"{wins}/8 problems (hybrid/plain S: {'; '.join(rows)}), {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# 8: planted-feature recovery end to end
# ---------------------------------------------------------------------------


def test_c8_planted_recovery():
    t0 = time.perf_counter()
    grid = build_grid(0.1)
    recovered = 0
    acc_ok = 0
    hits = []
    for seed in range(20):
        ds = standardize(make_planted(n=400, n_informative=5, n_noise=15, seed=seed))
        p = build_problem(ds.features, one_hot(ds))
        res = sweep(p, grid, SearchConfig(seed=seed))
        ranking = rank_features(quadrant_process(res.best_W))
        h = sum(1 for j in ranking.top(10) if j < 5)
        hits.append(h)
        recovered += h >= 4
        curve = backward_eliminate(ds, ranking, EvalConfig(n_trials=20, base_seed=seed))
        acc_ok += curve.best_accuracy >= curve.accuracy_at(ds.d)
    elapsed = time.perf_counter() - t0
    ok = recovered >= 18 and acc_ok == 20 and elapsed <= 600
    record("C8 planted recovery", ok,
           f">=4/5 informative in top 10 for {recovered}/20 seeds (hits {hits}); best>=full in {acc_ok}/20; {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# 9, 10: CLI
# ---------------------------------------------------------------------------


def test_c9_determinism(tmp_path):
    path = tmp_path / "data.csv"
    write_csv(make_planted(seed=11), path)
    for out in ("a", "b"):
        code = main(["rank", "--data", str(path), "--label-col", "class", "--seed", "5", "--out", str(tmp_path / out)])
        assert code == 0
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in ("ranking.csv", "sweep.csv"))
    record("C9 determinism", same, "ranking.csv and sweep.csv byte-identical across two runs" if same else "outputs differ")


def test_c10_segment_shape(tmp_path):
    path = tmp_path / "segment_like.csv"
    write_csv(make_classification(2310, 19, 7, seed=19), path)
    out = tmp_path / "seg"
    assert main(["rank", "--data", str(path), "--label-col", "class", "--out", str(out)]) == 0
    assert main(["eval", "--data", str(path), "--label-col", "class", "--ranking", str(out / "ranking.csv"),
                 "--out", str(out)]) == 0
    ranking = (out / "ranking.csv").read_text().splitlines()
    curve = (out / "curve.csv").read_text().splitlines()
    header_ok = ranking[0] == "feature_index,feature_name,polygon_area,rank"
    idx = sorted(int(r.split(",")[0]) for r in ranking[1:])
    areas = [float(r.split(",")[2]) for r in ranking[1:]]
    sizes = [int(r.split(",")[0]) for r in curve[1:]]
    ok = header_ok and idx == list(range(19)) and areas == sorted(areas, reverse=True) and sizes == list(range(19, 0, -1))
    summary = json.loads((out / "summary.json").read_text())
    record("C10 segment shape", ok,
           f"{len(ranking) - 1}-row ranking, curve sizes {sizes[0]}..{sizes[-1]}, best size {summary['best_size']}")
