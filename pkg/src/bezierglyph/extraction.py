"""Raster glyph to normalized Bezier program.

binarize -> skeletonize -> pixel graph -> paths -> RDP -> merge -> fit ->
letterbox into [0, 1]^2 with y pointing up.

Pixel coordinates are ``(col, row)`` throughout; rows grow downward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np
from scipy import ndimage

from .geometry import (
    BezierCurve,
    Polyline,
    StrokeSequence,
    _basis_matrix,
    letterbox,
    rdp_simplify,
)

Pixel = tuple[int, int]

NORMALIZE_MARGIN = 0.05
CLOSED_LOOP_PARTS = 4
REPARAM_ITERATIONS = 8
_EIGHT = np.ones((3, 3), dtype=bool)


class EmptyGlyph(ValueError):
    pass


@dataclass(frozen=True)
class ExtractionConfig:
    binarize_threshold: Union[int, str] = "otsu"
    rdp_epsilon: float = 2.0
    merge_gap: float = 3.0
    merge_angle: float = 30.0
    min_path_pixels: int = 4
    fit_tolerance: float = 2.0

    def __post_init__(self):
        t = self.binarize_threshold
        if isinstance(t, str):
            if t != "otsu":
                raise ValueError(f"binarize_threshold must be 'otsu' or a luminance, got {t!r}")
        elif not 0 < t <= 256:
            raise ValueError("binarize_threshold must be in (0, 256]")
        for name in ("rdp_epsilon", "merge_gap", "merge_angle", "min_path_pixels", "fit_tolerance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


# ---------------------------------------------------------------------------
# Step 1: binarization


def otsu_threshold(image: np.ndarray) -> int:
    """Threshold ``T`` such that pixels ``< T`` form the darker Otsu class."""
    hist = np.bincount(np.asarray(image, dtype=np.uint8).ravel(), minlength=256).astype(float)
    total = hist.sum()
    levels = np.arange(256, dtype=float)
    w0 = np.cumsum(hist)
    w1 = total - w0
    s0 = np.cumsum(hist * levels)
    mu_total = s0[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        m0 = s0 / w0
        m1 = (mu_total - s0) / w1
        between = w0 * w1 * (m0 - m1) ** 2
    between = np.nan_to_num(between, nan=0.0, posinf=0.0)
    return int(np.argmax(between)) + 1


def binarize(image: np.ndarray, config: ExtractionConfig = ExtractionConfig()) -> np.ndarray:
    """Boolean ink mask. Dark-on-light is assumed; majority ink flips polarity."""
    img = np.asarray(image)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("expected a non-empty 2-D grayscale image")
    t = otsu_threshold(img) if config.binarize_threshold == "otsu" else config.binarize_threshold
    fg = img < t
    if fg.sum() * 2 > fg.size:
        fg = ~fg
    if not fg.any():
        raise EmptyGlyph("no foreground pixels after binarization")
    return fg


# ---------------------------------------------------------------------------
# Step 2: thinning


def count_components(mask: np.ndarray) -> int:
    return int(ndimage.label(mask, structure=_EIGHT)[1])


# Ring order used for the Yokoi connectivity number: E NE N NW W SW S SE
_RING = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))


def _ring(img: np.ndarray, r: int, c: int) -> list[int]:
    return [int(img[r + dr, c + dc]) for dr, dc in _RING]


def _removable(img: np.ndarray, r: int, c: int) -> bool:
    """Simple (8-connected foreground) and not a line end."""
    x = _ring(img, r, c)
    if sum(x) < 2:
        return False
    xb = [1 - v for v in x]
    n = 0
    for k in (0, 2, 4, 6):
        n += xb[k] - xb[k] * xb[(k + 1) % 8] * xb[(k + 2) % 8]
    return n == 1


def _zs_candidates(img: np.ndarray, first: bool) -> np.ndarray:
    p = img.astype(np.uint8)
    core = p[1:-1, 1:-1]
    P2, P3, P4 = p[:-2, 1:-1], p[:-2, 2:], p[1:-1, 2:]
    P5, P6, P7 = p[2:, 2:], p[2:, 1:-1], p[2:, :-2]
    P8, P9 = p[1:-1, :-2], p[:-2, :-2]
    seq = [P2, P3, P4, P5, P6, P7, P8, P9, P2]
    b = sum(seq[:8])
    a = sum(((seq[k] == 0) & (seq[k + 1] == 1)).astype(np.uint8) for k in range(8))
    if first:
        c1, c2 = P2 * P4 * P6, P4 * P6 * P8
    else:
        c1, c2 = P2 * P4 * P8, P2 * P6 * P8
    return (core == 1) & (b >= 2) & (b <= 6) & (a == 1) & (c1 == 0) & (c2 == 0)


def _topology_kept(before: np.ndarray, after: np.ndarray) -> bool:
    """True when thinning ``before`` into ``after`` kept every 8-connected
    component whole and left the 4-connected background untouched."""
    old_labels, n_old = ndimage.label(before, structure=_EIGHT)
    n_new = ndimage.label(after, structure=_EIGHT)[1]
    survivors = np.unique(old_labels[after.astype(bool)])
    if n_new != n_old or len(survivors) != n_old:
        return False
    bg_before = ndimage.label(before == 0)[1]
    bg_after = ndimage.label(after == 0)[1]
    return bg_before == bg_after


def skeletonize(binary: np.ndarray) -> np.ndarray:
    """One-pixel-wide centreline that keeps 8-connected topology.

    Zhang-Suen subiterations delete in parallel. A subiteration that would
    change topology (the classic case is a 2x2 block vanishing) is replayed
    sequentially with a simple-point check per pixel instead. A final sweep
    removes the simple staircase corners Zhang-Suen leaves behind.
    """
    mask = np.asarray(binary, dtype=bool)
    if not mask.any():
        raise EmptyGlyph("nothing to skeletonize")
    img = np.pad(mask, 1).astype(np.uint8)
    changed = True
    while changed:
        changed = False
        for first in (True, False):
            cand = _zs_candidates(img, first)
            if not cand.any():
                continue
            trial = img.copy()
            trial[1:-1, 1:-1][cand] = 0
            if _topology_kept(img, trial):
                img = trial
                changed = True
                continue
            rows, cols = np.nonzero(cand)
            for r, c in zip(rows + 1, cols + 1):
                if _removable(img, r, c):
                    img[r, c] = 0
                    changed = True
    changed = True
    while changed:
        changed = False
        rows, cols = np.nonzero(img)
        for r, c in zip(rows, cols):
            if _removable(img, r, c):
                img[r, c] = 0
                changed = True
    return img[1:-1, 1:-1].astype(bool)


# ---------------------------------------------------------------------------
# Step 3: graph and paths


@dataclass
class SkeletonGraph:
    adjacency: dict[Pixel, frozenset[Pixel]] = field(default_factory=dict)

    @property
    def nodes(self) -> list[Pixel]:
        return sorted(self.adjacency)

    @property
    def edges(self) -> set[tuple[Pixel, Pixel]]:
        return {(a, b) for a, nbrs in self.adjacency.items() for b in nbrs if a < b}

    def degree(self, node: Pixel) -> int:
        return len(self.adjacency[node])

    @property
    def node_degree(self) -> dict[Pixel, int]:
        return {n: len(v) for n, v in self.adjacency.items()}


def build_pixel_graph(skeleton: np.ndarray) -> SkeletonGraph:
    """8-neighbour graph; a diagonal edge is dropped when an orthogonal
    common neighbour already links its two ends."""
    mask = np.asarray(skeleton, dtype=bool)
    h, w = mask.shape
    rows, cols = np.nonzero(mask)
    fg = set(zip(cols.tolist(), rows.tolist()))
    adj: dict[Pixel, set[Pixel]] = {p: set() for p in fg}
    for x, y in fg:
        for dx, dy in ((1, 0), (0, 1), (1, 1), (1, -1)):
            q = (x + dx, y + dy)
            if q not in fg:
                continue
            if dx and dy and ((x + dx, y) in fg or (x, y + dy) in fg):
                continue
            adj[(x, y)].add(q)
            adj[q].add((x, y))
    return SkeletonGraph({p: frozenset(n) for p, n in adj.items()})


@dataclass(frozen=True)
class PixelPath:
    pixels: tuple[Pixel, ...]

    @property
    def closed(self) -> bool:
        return len(self.pixels) > 2 and self.pixels[0] == self.pixels[-1]

    def __len__(self) -> int:
        return len(self.pixels)

    def edges(self) -> list[tuple[Pixel, Pixel]]:
        return [tuple(sorted(e)) for e in zip(self.pixels, self.pixels[1:])]


def _trace(adj: dict[Pixel, frozenset[Pixel]]) -> list[PixelPath]:
    seen: set[tuple[Pixel, Pixel]] = set()

    def key(a, b):
        return (a, b) if a < b else (b, a)

    def walk(start: Pixel, nxt: Pixel) -> PixelPath:
        path = [start, nxt]
        seen.add(key(start, nxt))
        prev, cur = start, nxt
        while len(adj[cur]) == 2:
            step = [q for q in sorted(adj[cur]) if key(cur, q) not in seen]
            if not step:
                break
            prev, cur = cur, step[0]
            seen.add(key(prev, cur))
            path.append(cur)
        return PixelPath(tuple(path))

    paths = []
    for node in sorted(adj):
        if len(adj[node]) == 2:
            continue
        for nb in sorted(adj[node]):
            if key(node, nb) not in seen:
                paths.append(walk(node, nb))
    # whatever is left are cycles made only of degree-2 pixels
    for node in sorted(adj):
        for nb in sorted(adj[node]):
            if key(node, nb) not in seen:
                paths.append(walk(node, nb))
    return paths


def segment_paths(graph: SkeletonGraph, min_path_pixels: int = 0) -> list[PixelPath]:
    """Split the graph at pixels whose degree is not 2.

    With ``min_path_pixels`` > 0, spurs (endpoint-to-junction paths shorter
    than that) are pruned repeatedly, and any remaining short path touching
    a junction is dropped. With 0 the paths partition the edge set exactly.
    """
    adj = dict(graph.adjacency)
    if min_path_pixels <= 0:
        return _trace(adj)

    while True:
        removed = False
        for path in sorted(_trace(adj), key=lambda p: (len(p), p.pixels)):
            if len(path) >= min_path_pixels or path.closed:
                continue
            a, b = path.pixels[0], path.pixels[-1]
            deg_a, deg_b = len(adj[a]), len(adj[b])
            if deg_a == 1 and deg_b >= 3:
                junction, body = b, path.pixels[:-1]
            elif deg_b == 1 and deg_a >= 3:
                junction, body = a, path.pixels[1:]
            else:
                continue
            # the degree check is redone per spur so a junction is never
            # stripped of every branch
            if len(adj[junction]) < 3:
                continue
            for px in body:
                for q in adj.pop(px):
                    if q in adj:
                        adj[q] = adj[q] - {px}
            removed = True
        if not removed:
            break

    kept = []
    for path in _trace(adj):
        ends = (path.pixels[0], path.pixels[-1])
        at_junction = any(len(adj[e]) >= 3 for e in ends)
        if len(path) < min_path_pixels and at_junction:
            continue
        kept.append(path)
    return kept


# ---------------------------------------------------------------------------
# Step 4: merge and fit


def path_to_polyline(path: PixelPath) -> Polyline:
    return Polyline(tuple((float(x), float(y)) for x, y in path.pixels))


def _unit(v: np.ndarray) -> np.ndarray:
    n = math.hypot(v[0], v[1])
    return v / n if n > 0 else v


def _turn_degrees(a: np.ndarray, b: np.ndarray) -> float:
    """Angle between the arrival direction of ``a`` and departure of ``b``."""
    din = _unit(a[-1] - a[-2])
    dout = _unit(b[1] - b[0])
    cos = float(np.clip(din @ dout, -1.0, 1.0))
    return math.degrees(math.acos(cos))


def _join(a: Polyline, b: Polyline) -> Polyline:
    tail = b.vertices[1:] if a.vertices[-1] == b.vertices[0] else b.vertices
    return Polyline(a.vertices + tail)


def merge_paths(
    paths: Sequence[Union[PixelPath, Polyline]], config: ExtractionConfig = ExtractionConfig()
) -> list[Polyline]:
    """Greedily join end-to-end pairs that are close and nearly collinear.

    Each round joins the single best pair (smallest turn, then smallest gap,
    then input order) and re-evaluates.
    """
    polys = [path_to_polyline(p) if isinstance(p, PixelPath) else p for p in paths]
    while len(polys) > 1:
        best = None
        for i in range(len(polys)):
            for j in range(i + 1, len(polys)):
                for combo, (a, b) in enumerate(_orientations(polys[i], polys[j])):
                    aa, bb = a.array, b.array
                    gap = float(math.hypot(*(aa[-1] - bb[0])))
                    if gap > config.merge_gap:
                        continue
                    turn = _turn_degrees(aa, bb)
                    if turn >= config.merge_angle:
                        continue
                    cand = (turn, gap, i, j, combo)
                    if best is None or cand < best[0]:
                        best = (cand, a, b)
        if best is None:
            break
        (_, _, i, j, _), a, b = best
        polys[i] = _join(a, b)
        del polys[j]
    return polys


def _orientations(p: Polyline, q: Polyline) -> list[tuple[Polyline, Polyline]]:
    return [(p, q), (p, q.reversed()), (p.reversed(), q), (q, p)]


@dataclass(frozen=True)
class FitPiece:
    """A fitted curve for ``points[first : last + 1]`` at parameters ``params``."""

    curve: BezierCurve
    first: int
    last: int
    params: np.ndarray = field(repr=False, compare=False)
    residual: float


def chord_parameters(points: np.ndarray) -> np.ndarray:
    seg = np.hypot(*np.diff(points, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    return cum / cum[-1] if cum[-1] > 0 else np.linspace(0.0, 1.0, len(points))


def fit_least_squares(points: np.ndarray, params: np.ndarray, degree: int) -> np.ndarray:
    """Control points with both ends pinned to the data ends."""
    basis = _basis_matrix(degree, params)
    ctrl = np.zeros((degree + 1, 2))
    ctrl[0], ctrl[-1] = points[0], points[-1]
    if degree > 1:
        rhs = points - np.outer(basis[:, 0], points[0]) - np.outer(basis[:, -1], points[-1])
        ctrl[1:-1] = np.linalg.lstsq(basis[:, 1:-1], rhs, rcond=None)[0]
    return ctrl


def fit_residuals(points: np.ndarray, params: np.ndarray, ctrl: np.ndarray) -> np.ndarray:
    fitted = _basis_matrix(len(ctrl) - 1, params) @ ctrl
    return np.hypot(*(fitted - points).T)


def refine_parameters(points: np.ndarray, params: np.ndarray, ctrl: np.ndarray) -> np.ndarray:
    """One Newton step per point towards its closest curve parameter."""
    n = len(ctrl) - 1
    d1 = n * np.diff(ctrl, axis=0)
    d2 = (n - 1) * np.diff(d1, axis=0) if n > 1 else np.zeros((1, 2))
    err = _basis_matrix(n, params) @ ctrl - points
    first = _basis_matrix(n - 1, params) @ d1
    second = _basis_matrix(max(n - 2, 0), params) @ d2
    num = np.einsum("ij,ij->i", err, first)
    den = np.einsum("ij,ij->i", first, first) + np.einsum("ij,ij->i", err, second)
    step = np.divide(num, den, out=np.zeros_like(num), where=np.abs(den) > 1e-12)
    out = np.clip(params - step, 0.0, 1.0)
    out[0], out[-1] = 0.0, 1.0
    # keep the ordering of the samples along the curve
    return np.maximum.accumulate(out)


def _fit_degree(points: np.ndarray, degree: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    params = chord_parameters(points)
    ctrl = fit_least_squares(points, params, degree)
    res = fit_residuals(points, params, ctrl)
    if degree == 1:
        return ctrl, params, res
    for _ in range(REPARAM_ITERATIONS):
        p2 = refine_parameters(points, params, ctrl)
        c2 = fit_least_squares(points, p2, degree)
        r2 = fit_residuals(points, p2, c2)
        if r2.max() >= res.max():
            break
        params, ctrl, res = p2, c2, r2
    return ctrl, params, res


def _fit_open(points: np.ndarray, tol: float, offset: int) -> list[FitPiece]:
    res = None
    for degree in (1, 2, 3):
        ctrl, params, res = _fit_degree(points, degree)
        if res.max() <= tol:
            curve = BezierCurve(tuple(map(tuple, ctrl)))
            return [FitPiece(curve, offset, offset + len(points) - 1, params, float(res.max()))]
    split = 1 + int(np.argmax(res[1:-1]))
    return _fit_open(points[: split + 1], tol, offset) + _fit_open(points[split:], tol, offset + split)


def loop_splits(points: np.ndarray, parts: int = CLOSED_LOOP_PARTS) -> list[int]:
    """Vertex indices nearest to equal arc-length fractions of a closed path."""
    cum = chord_parameters(points)
    picks = {int(np.argmin(np.abs(cum - k / parts))) for k in range(1, parts)}
    return sorted(i for i in picks if 0 < i < len(points) - 1)


def fit_pieces(points: np.ndarray, tol: float) -> list[FitPiece]:
    """Fit a polyline with as few low-degree curves as the tolerance allows.

    Tries degree 1, 2, 3 in turn and takes the first whose residual is within
    ``tol``. Parameters start at chord length and are refined by Newton
    steps; residuals are measured at the final parameters. If the cubic
    fails, the polyline is split at its worst vertex.
    A closed path is first cut into quarters by arc length, so a loop yields
    the same pieces whatever its pixel size.
    """
    points = np.asarray(points, dtype=float)
    cuts = [0, len(points) - 1]
    if len(points) > 3 and np.array_equal(points[0], points[-1]):
        cuts[1:1] = loop_splits(points)
    out = []
    for lo, hi in zip(cuts, cuts[1:]):
        out.extend(_fit_open(points[lo : hi + 1], tol, lo))
    return out


def rotate_loop(points: np.ndarray) -> np.ndarray:
    """Restart a closed path at its sharpest corner (first one on ties)."""
    points = np.asarray(points, dtype=float)
    if len(points) < 4 or not np.array_equal(points[0], points[-1]):
        return points
    ring = points[:-1]
    incoming = ring - np.roll(ring, 1, axis=0)
    outgoing = np.roll(ring, -1, axis=0) - ring
    norms = np.hypot(*incoming.T) * np.hypot(*outgoing.T)
    cos = np.einsum("ij,ij->i", incoming, outgoing) / np.where(norms > 0, norms, 1.0)
    k = int(np.argmin(np.round(cos, 12)))
    ring = np.roll(ring, -k, axis=0)
    return np.vstack([ring, ring[:1]])


def fit_strokes(polylines: Iterable[Polyline], config: ExtractionConfig = ExtractionConfig()) -> list[BezierCurve]:
    """Lowest-degree least-squares fit per polyline, splitting when cubic fails."""
    curves = []
    for poly in polylines:
        curves.extend(p.curve for p in fit_pieces(rotate_loop(poly.array), config.fit_tolerance))
    return curves


# ---------------------------------------------------------------------------


def trace_polylines(image: np.ndarray, config: ExtractionConfig = ExtractionConfig()) -> list[Polyline]:
    """Everything up to (and including) merging, in pixel coordinates."""
    skeleton = skeletonize(binarize(image, config))
    graph = build_pixel_graph(skeleton)
    paths = segment_paths(graph, config.min_path_pixels)
    simplified = [rdp_simplify(path_to_polyline(p), config.rdp_epsilon) for p in paths]
    return merge_paths(simplified, config)


def extract_glyph(image: np.ndarray, config: ExtractionConfig = ExtractionConfig()) -> StrokeSequence:
    polylines = trace_polylines(image, config)
    curves = fit_strokes(polylines, config)
    if not curves:
        raise EmptyGlyph("skeleton produced no strokes")
    return StrokeSequence(tuple(letterbox(curves, NORMALIZE_MARGIN, flip_y=True)))
