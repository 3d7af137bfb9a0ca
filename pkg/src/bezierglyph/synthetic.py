"""Seeded synthetic glyphs for tests, calibration and the acceptance suite."""

from __future__ import annotations

import numpy as np

from .geometry import BezierCurve, StrokeSequence, letterbox


def random_curve(rng: np.random.Generator, degree: int | None = None, lo: float = 0.0, hi: float = 1.0) -> BezierCurve:
    degree = int(rng.integers(1, 4)) if degree is None else degree
    pts = rng.uniform(lo, hi, size=(degree + 1, 2))
    return BezierCurve(tuple(map(tuple, pts)))


def random_sequence(rng: np.random.Generator, min_strokes: int = 1, max_strokes: int = 20) -> StrokeSequence:
    """Unconstrained strokes with mixed degrees; strokes may cross."""
    n = int(rng.integers(min_strokes, max_strokes + 1))
    return StrokeSequence(tuple(random_curve(rng) for _ in range(n)))


def _smooth_stroke(rng: np.random.Generator, cell: tuple[float, float, float, float]) -> BezierCurve:
    """A gently bent stroke spanning most of ``cell``."""
    x0, y0, x1, y1 = cell
    centre = np.array([(x0 + x1) / 2, (y0 + y1) / 2])
    half = (x1 - x0) / 2 * 0.8
    theta = rng.uniform(0, np.pi)
    direction = np.array([np.cos(theta), np.sin(theta)])
    normal = np.array([-direction[1], direction[0]])
    a, b = centre - half * direction, centre + half * direction
    degree = int(rng.integers(1, 4))
    if degree == 1:
        pts = [a, b]
    elif degree == 2:
        bend = rng.uniform(-0.35, 0.35) * half
        pts = [a, centre + bend * normal, b]
    else:
        bend = rng.uniform(-0.3, 0.3) * half
        pts = [a, a + (b - a) / 3 + bend * normal, a + 2 * (b - a) / 3 + bend * normal, b]
    return BezierCurve(tuple(map(tuple, pts)))


def well_separated_sequence(rng: np.random.Generator, max_strokes: int = 4, grid: int = 2) -> StrokeSequence:
    """Strokes confined to distinct grid cells, letterboxed like extractor output."""
    n = int(rng.integers(1, max_strokes + 1))
    cells = rng.permutation(grid * grid)[:n]
    size = 1.0 / grid
    curves = []
    for k in cells:
        cx, cy = divmod(int(k), grid)
        cell = (cx * size, cy * size, (cx + 1) * size, (cy + 1) * size)
        curves.append(_smooth_stroke(rng, cell))
    return StrokeSequence(tuple(letterbox(curves, 0.05)))


# ---------------------------------------------------------------------------
# Raster fixtures (dark ink on white)


def blank(size: int = 96) -> np.ndarray:
    return np.full((size, size), 255, dtype=np.uint8)


def bar_image(size: int = 96, thickness: int = 8, vertical: bool = False) -> np.ndarray:
    img = blank(size)
    lo = size // 2 - thickness // 2
    margin = size // 8
    if vertical:
        img[margin : size - margin, lo : lo + thickness] = 0
    else:
        img[lo : lo + thickness, margin : size - margin] = 0
    return img


def cross_image(size: int = 96, thickness: int = 8) -> np.ndarray:
    return np.minimum(bar_image(size, thickness), bar_image(size, thickness, vertical=True))


def ring_image(size: int = 96, radius: float = 30.0, thickness: float = 6.0) -> np.ndarray:
    img = blank(size)
    yy, xx = np.mgrid[:size, :size]
    r = np.hypot(xx - size / 2, yy - size / 2)
    img[np.abs(r - radius) <= thickness / 2] = 0
    return img


def blobs_image(size: int = 96, count: int = 2, thickness: int = 6) -> np.ndarray:
    """``count`` disjoint short bars in a column."""
    img = blank(size)
    step = size // (count + 1)
    for k in range(count):
        row = step * (k + 1) - thickness // 2
        img[row : row + thickness, size // 6 : size - size // 6] = 0
    return img


def synthetic_corpus(seed: int = 0, count: int = 50) -> list[tuple[str, np.ndarray]]:
    """Named binary-ish glyph images: bars, crosses, rings and multi-part glyphs."""
    rng = np.random.default_rng(seed)
    out = []
    kinds = ("bar", "cross", "ring", "blobs", "square")
    for i in range(count):
        kind = kinds[i % len(kinds)]
        size = int(rng.integers(48, 129))
        t = int(rng.integers(2, max(3, size // 10)))
        if kind == "bar":
            img = bar_image(size, t, vertical=bool(rng.integers(0, 2)))
        elif kind == "cross":
            img = cross_image(size, t)
        elif kind == "ring":
            img = ring_image(size, size * rng.uniform(0.2, 0.4), t)
        elif kind == "blobs":
            img = blobs_image(size, int(rng.integers(2, 5)), t)
        else:
            img = blank(size)
            for _ in range(int(rng.integers(1, 4))):
                x, y = rng.integers(0, size - 4, size=2)
                w, h = rng.integers(2, 5, size=2)
                img[y : y + h, x : x + w] = 0
            if img.min() == 255:
                img[size // 2, size // 2] = 0
        out.append((f"{i:03d}_{kind}", img))
    return out
