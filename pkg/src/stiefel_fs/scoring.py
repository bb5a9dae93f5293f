"""Per-feature polygon areas from a converged weight matrix.

Row ``j`` of ``|W|`` is drawn as the polyline through ``(0, 0), (1, w_j1),
..., (k, w_jk), (k + 1, 0)``; the area under it is the score of feature ``j``.
With unit spacing and zero anchors the area equals the row sum exactly.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class QuadrantWeights:
    W_delta: np.ndarray

    @property
    def d(self) -> int:
        return self.W_delta.shape[0]

    @property
    def k(self) -> int:
        return self.W_delta.shape[1]


@dataclass(frozen=True)
class FeaturePolygon:
    feature_index: int
    vertices: Tuple[Tuple[float, float], ...]

    def ys(self) -> np.ndarray:
        return np.array([v[1] for v in self.vertices])


@dataclass(frozen=True)
class FeatureRanking:
    """``entries`` are ``(feature_index, area)`` sorted by area, descending."""

    entries: Tuple[Tuple[int, float], ...]

    @property
    def order(self) -> List[int]:
        return [i for i, _ in self.entries]

    def areas_by_feature(self) -> np.ndarray:
        out = np.empty(len(self.entries))
        for i, a in self.entries:
            out[i] = a
        return out

    def top(self, s: int) -> List[int]:
        return self.order[:s]

    def to_csv(self, feature_names: Optional[Sequence[str]] = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["feature_index", "feature_name", "polygon_area", "rank"])
        for r, (i, a) in enumerate(self.entries, start=1):
            name = feature_names[i] if feature_names is not None else f"f{i}"
            w.writerow([i, name, repr(float(a)), r])
        return buf.getvalue()

    def to_json(self, feature_names: Optional[Sequence[str]] = None) -> str:
        rows = [
            {
                "feature_index": i,
                "feature_name": feature_names[i] if feature_names is not None else f"f{i}",
                "polygon_area": float(a),
                "rank": r,
            }
            for r, (i, a) in enumerate(self.entries, start=1)
        ]
        return json.dumps(rows, indent=2)

    @classmethod
    def from_csv(cls, text: str) -> "FeatureRanking":
        rows = list(csv.DictReader(io.StringIO(text)))
        rows.sort(key=lambda r: int(r["rank"]))
        return cls(tuple((int(r["feature_index"]), float(r["polygon_area"])) for r in rows))


def quadrant_process(W) -> QuadrantWeights:
    """Map ``W`` entrywise into the first quadrant with ``|.|``."""
    Wd = np.abs(np.asarray(W, dtype=np.float64))
    Wd.flags.writeable = False
    return QuadrantWeights(Wd)


def build_polygon(wq: QuadrantWeights, feature: int) -> FeaturePolygon:
    if not 0 <= feature < wq.d:
        raise IndexError(f"feature {feature} out of range [0, {wq.d})")
    row = wq.W_delta[feature]
    k = row.shape[0]
    verts = [(0.0, 0.0)]
    verts += [(float(c + 1), float(row[c])) for c in range(k)]
    verts.append((float(k + 1), 0.0))
    return FeaturePolygon(int(feature), tuple(verts))


def polygon_area(poly: FeaturePolygon) -> float:
    """Area between the polyline and the x-axis, one trapezoid per segment."""
    xs = np.array([v[0] for v in poly.vertices])
    ys = poly.ys()
    return float(np.sum(0.5 * (ys[:-1] + ys[1:]) * np.diff(xs)))


def polygon_areas(wq: QuadrantWeights) -> np.ndarray:
    """Areas for every feature at once (anchored rows through the trapezoid kernel)."""
    padded = np.zeros((wq.d, wq.k + 2))
    padded[:, 1:-1] = wq.W_delta
    return _kernels.trapezoid_rows(padded)


def rank_features(wq: QuadrantWeights) -> FeatureRanking:
    areas = polygon_areas(wq)
    idx = np.arange(wq.d)
    order = np.lexsort((idx, -areas))
    return FeatureRanking(tuple((int(i), float(areas[i])) for i in order))


def polygons_json(wq: QuadrantWeights, feature_names: Optional[Sequence[str]] = None) -> str:
    """Vertex lists for plotting, one object per feature."""
    out = []
    for j in range(wq.d):
        poly = build_polygon(wq, j)
        out.append(
            {
                "feature_index": j,
                "feature_name": feature_names[j] if feature_names is not None else f"f{j}",
                "vertices": [list(v) for v in poly.vertices],
                "area": polygon_area(poly),
            }
        )
    return json.dumps(out, indent=2)
