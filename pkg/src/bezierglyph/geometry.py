"""Bezier curves, stroke sequences and polyline helpers.

Points are plain ``(x, y)`` float tuples. Curves are immutable; the numpy
view of the control points is computed once and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np

Point2 = Tuple[float, float]
Vector2 = Tuple[float, float]

MAX_DEGREE = 3
DEGENERATE_DERIVATIVE = 1e-12
DEFAULT_SAMPLES = 10
DEFAULT_ARC_SEGMENTS = 64


def _check_unit(t: float) -> None:
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"parameter t={t!r} outside [0, 1]")


@dataclass(frozen=True)
class BezierCurve:
    control_points: Tuple[Point2, ...]

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.control_points)
        if len(pts) < 2:
            raise ValueError("a Bezier curve needs at least 2 control points")
        if len(pts) - 1 > MAX_DEGREE:
            raise ValueError(f"degree {len(pts) - 1} exceeds cubic")
        if not all(math.isfinite(v) for p in pts for v in p):
            raise ValueError("control points must be finite")
        object.__setattr__(self, "control_points", pts)

    @property
    def degree(self) -> int:
        return len(self.control_points) - 1

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.control_points, dtype=float)
        arr.setflags(write=False)
        return arr

    @classmethod
    def line(cls, a: Point2, b: Point2) -> "BezierCurve":
        return cls((a, b))


@dataclass(frozen=True)
class Polyline:
    vertices: Tuple[Point2, ...]

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(pts) < 2:
            raise ValueError("a polyline needs at least 2 vertices")
        for a, b in zip(pts, pts[1:]):
            if a == b:
                raise ValueError(f"repeated consecutive vertex {a}")
        object.__setattr__(self, "vertices", pts)

    def __len__(self) -> int:
        return len(self.vertices)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    def reversed(self) -> "Polyline":
        return Polyline(self.vertices[::-1])


@dataclass(frozen=True)
class StrokeSequence:
    """A glyph program: ordered strokes in one coordinate space.

    ``pixel_size`` is ``None`` for normalized [0, 1] coordinates, otherwise
    the ``(width, height)`` of the raster the coordinates refer to.
    """

    strokes: Tuple[BezierCurve, ...] = ()
    pixel_size: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        strokes = tuple(self.strokes)
        object.__setattr__(self, "strokes", strokes)
        if self.pixel_size is None:
            for curve in strokes:
                if np.any(curve.array < 0.0) or np.any(curve.array > 1.0):
                    raise ValueError("normalized sequence has points outside [0, 1]")

    @property
    def normalized(self) -> bool:
        return self.pixel_size is None

    def __len__(self) -> int:
        return len(self.strokes)

    def __iter__(self):
        return iter(self.strokes)


# ---------------------------------------------------------------------------
# Bernstein evaluation


def bernstein_basis(i: int, n: int, t: float) -> float:
    if not 0 <= i <= n:
        raise ValueError(f"basis index {i} outside [0, {n}]")
    _check_unit(t)
    return math.comb(n, i) * t**i * (1.0 - t) ** (n - i)


def _basis_matrix(n: int, ts: np.ndarray) -> np.ndarray:
    """Rows are parameters, columns are B_{i,n}(t) for i = 0..n."""
    ts = np.asarray(ts, dtype=float)[:, None]
    i = np.arange(n + 1)[None, :]
    coeff = np.array([math.comb(n, k) for k in range(n + 1)], dtype=float)[None, :]
    return coeff * ts**i * (1.0 - ts) ** (n - i)


def evaluate_many(curve: BezierCurve, ts: np.ndarray) -> np.ndarray:
    return _basis_matrix(curve.degree, ts) @ curve.array


def derivative_many(curve: BezierCurve, ts: np.ndarray) -> np.ndarray:
    n = curve.degree
    diffs = n * np.diff(curve.array, axis=0)
    return _basis_matrix(n - 1, ts) @ diffs


def unit_tangents(curve: BezierCurve, ts: np.ndarray) -> np.ndarray:
    d = derivative_many(curve, ts)
    norms = np.hypot(d[:, 0], d[:, 1])
    out = np.zeros_like(d)
    ok = norms >= DEGENERATE_DERIVATIVE
    out[ok] = d[ok] / norms[ok, None]
    return out


def evaluate_curve(curve: BezierCurve, t: float) -> Point2:
    _check_unit(t)
    x, y = evaluate_many(curve, np.array([t]))[0]
    return (float(x), float(y))


def tangent_at(curve: BezierCurve, t: float) -> Vector2:
    """Unit tangent; the zero vector where the derivative vanishes."""
    _check_unit(t)
    dx, dy = unit_tangents(curve, np.array([t]))[0]
    return (float(dx), float(dy))


def sample_params(k: int) -> np.ndarray:
    if k < 2:
        raise ValueError("need at least 2 samples")
    return np.linspace(0.0, 1.0, k)


def sample_uniform(curve: BezierCurve, k: int = DEFAULT_SAMPLES) -> list[tuple[Point2, Vector2]]:
    ts = sample_params(k)
    pts = evaluate_many(curve, ts)
    tans = unit_tangents(curve, ts)
    return [
        ((float(p[0]), float(p[1])), (float(v[0]), float(v[1])))
        for p, v in zip(pts, tans)
    ]


def arc_length(curve: BezierCurve, segments: int = DEFAULT_ARC_SEGMENTS) -> float:
    if segments < 1:
        raise ValueError("segments must be >= 1")
    if curve.degree == 1:
        (x0, y0), (x1, y1) = curve.control_points
        return math.hypot(x1 - x0, y1 - y0)
    if len(set(curve.control_points)) == 1:
        return 0.0
    pts = evaluate_many(curve, np.linspace(0.0, 1.0, segments + 1))
    return float(np.sum(np.hypot(*np.diff(pts, axis=0).T)))


def reverse_curve(curve: BezierCurve) -> BezierCurve:
    return BezierCurve(curve.control_points[::-1])


def bounding_box(curves: Sequence[BezierCurve]) -> tuple[float, float, float, float]:
    """(xmin, ymin, xmax, ymax) of all control points."""
    pts = np.vstack([c.array for c in curves])
    xmin, ymin = pts.min(axis=0)
    xmax, ymax = pts.max(axis=0)
    return float(xmin), float(ymin), float(xmax), float(ymax)


def letterbox(
    curves: Sequence[BezierCurve], margin: float = 0.05, flip_y: bool = False
) -> list[BezierCurve]:
    """Map curves into [0, 1]^2 keeping aspect ratio.

    The longer side of the control-point bounding box spans ``1 - 2*margin``
    and the box is centred. With ``flip_y`` the y axis is inverted, which
    turns raster rows into upward-pointing coordinates.
    """
    if not curves:
        return []
    xmin, ymin, xmax, ymax = bounding_box(curves)
    span = max(xmax - xmin, ymax - ymin)
    scale = (1.0 - 2.0 * margin) / span if span > 0 else 0.0
    cx, cy = (xmin + xmax) / 2.0, (ymin + ymax) / 2.0
    sy = -scale if flip_y else scale
    out = []
    for c in curves:
        arr = c.array
        x = 0.5 + (arr[:, 0] - cx) * scale
        y = 0.5 + (arr[:, 1] - cy) * sy
        pts = np.clip(np.column_stack([x, y]), 0.0, 1.0)
        out.append(BezierCurve(tuple(map(tuple, pts))))
    return out


# ---------------------------------------------------------------------------
# Polylines


def point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each row of ``p`` to the segment ab."""
    p = np.atleast_2d(p)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.hypot(*(p - a).T)
    t = np.clip(((p - a) @ ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.hypot(*(p - proj).T)


def rdp_indices(points: np.ndarray, epsilon: float) -> list[int]:
    """Indices kept by Ramer-Douglas-Peucker, iterative to avoid deep recursion.

    Deviation is measured to the chord *segment*, so a dropped vertex is
    always within ``epsilon`` of the simplified polyline, even on paths
    that double back past their endpoints.
    """
    n = len(points)
    keep = np.zeros(n, dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, n - 1)]
    if n > 2 and np.array_equal(points[0], points[-1]):
        # closed path: the chord is a point, so always split at the far side
        far = 1 + int(np.argmax(np.hypot(*(points[1:-1] - points[0]).T)))
        keep[far] = True
        stack = [(0, far), (far, n - 1)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        d = point_segment_distance(points[lo + 1 : hi], points[lo], points[hi])
        k = int(np.argmax(d))
        if d[k] > epsilon:
            mid = lo + 1 + k
            keep[mid] = True
            stack.append((lo, mid))
            stack.append((mid, hi))
    return [int(i) for i in np.flatnonzero(keep)]


def rdp_simplify(path: Polyline, epsilon: float) -> Polyline:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    idx = rdp_indices(path.array, epsilon)
    return Polyline(tuple(path.vertices[i] for i in idx))
