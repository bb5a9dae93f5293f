"""Sweep of direction weights scored by the area under the descent curve."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from . import _kernels
from .errors import ConfigError, NumericalError
from .objective import CenteredProblem
from .optimizer import (
    MIN_WEIGHT,
    DescentTrace,
    SearchConfig,
    SimplexWeights,
    init_stiefel,
    minimize,
)

DEFAULT_GRID_STEP = 0.05


@dataclass(frozen=True)
class SimplexGrid:
    points: Tuple[SimplexWeights, ...]
    step: float

    def __len__(self):
        return len(self.points)


@dataclass
class SweepPoint:
    weights: SimplexWeights
    area: float
    converged: bool
    iterations: int
    trace: DescentTrace = field(repr=False)


@dataclass
class SweepResult:
    per_point: List[SweepPoint]
    best: int
    best_W: np.ndarray

    @property
    def best_point(self) -> SweepPoint:
        return self.per_point[self.best]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "beta", "gamma", "S", "iterations", "converged"])
        for pt in self.per_point:
            a, b, g = pt.weights.as_tuple()
            w.writerow([repr(a), repr(b), repr(g), repr(float(pt.area)), pt.iterations, int(pt.converged)])
        return buf.getvalue()


def _lattice(step: float) -> List[float]:
    vals = {MIN_WEIGHT}
    i = 1
    while i * step <= 1.0 - 2 * MIN_WEIGHT + 1e-12:
        vals.add(round(i * step, 12))
        i += 1
    return sorted(vals)


def build_grid(step: float = DEFAULT_GRID_STEP) -> SimplexGrid:
    """All ``(alpha, beta, 1 - alpha - beta)`` with alpha, beta on the lattice
    ``{0.01, step, 2 step, ...}`` and every component at least 0.01."""
    if not (0 < step <= 0.5) or not math.isfinite(step):
        raise ConfigError(f"grid step must lie in (0, 0.5], got {step}")
    lat = _lattice(step)
    pts = []
    seen = set()
    for a in lat:
        for b in lat:
            g = round(1.0 - a - b, 12)
            if g < MIN_WEIGHT - 1e-12:
                continue
            key = (a, b, g)
            if key in seen:
                continue
            seen.add(key)
            pts.append(SimplexWeights(a, b, g))
    if not pts:
        raise ConfigError(f"grid step {step} yields no admissible points")
    return SimplexGrid(tuple(pts), float(step))


def curve_area(trace: DescentTrace, normalize: bool = True) -> float:
    """Trapezoid area under the objective-vs-iteration curve.

    With ``normalize`` the curve is divided by its first value, which makes
    the area invariant to scaling of the objective.
    """
    f = np.asarray(trace.f_values, dtype=np.float64)
    if f.size == 0:
        raise NumericalError("empty descent trace")
    if f.size == 1:
        return 0.0
    if normalize:
        if not f[0] > 0:
            raise NumericalError(f"degenerate curve: first objective value {f[0]!r} is not positive")
        f = f / f[0]
    return float(_kernels.trapezoid_rows(f[None, :])[0])


def _selection_key(pt: SweepPoint):
    return (pt.area, pt.iterations, pt.weights.as_tuple())


def sweep(
    p: CenteredProblem,
    grid: SimplexGrid,
    cfg: Optional[SearchConfig] = None,
    *,
    normalize: bool = True,
    threads: int = 1,
) -> SweepResult:
    """Minimize once per grid point from a shared start and keep the smallest area.

    Non-finite runs are skipped; if every run fails a ``NumericalError`` lists
    the per-point diagnostics.
    """
    cfg = cfg or SearchConfig()
    if len(grid) == 0:
        raise ConfigError("empty grid")
    cfg = replace(cfg, mode="hybrid")
    W0 = init_stiefel(p.d, p.k, cfg.seed)

    def run(w: SimplexWeights):
        try:
            W, tr = minimize(p, w, cfg, W0=W0)
            area = curve_area(tr, normalize=normalize)
        except NumericalError as exc:
            return None, str(exc)
        if not math.isfinite(area):
            return None, "non-finite curve area"
        return (W, SweepPoint(w, area, tr.converged, tr.iterations, tr)), None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, grid.points))
    else:
        results = [run(w) for w in grid.points]

    ok = [(i, r) for i, (r, _) in enumerate(results) if r is not None]
    if not ok:
        diag = "; ".join(f"{w.as_tuple()}: {err}" for w, (_, err) in zip(grid.points, results))
        raise NumericalError(f"every sweep run failed: {diag}")

    points = [r[1] for _, r in ok]
    Ws = [r[0] for _, r in ok]
    candidates = [i for i, pt in enumerate(points) if pt.converged] or list(range(len(points)))
    best = min(candidates, key=lambda i: _selection_key(points[i]))
    return SweepResult(points, best, Ws[best])
