from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bezierglyph.extraction import (
    EmptyGlyph,
    ExtractionConfig,
    PixelPath,
    binarize,
    build_pixel_graph,
    chord_parameters,
    count_components,
    extract_glyph,
    fit_pieces,
    fit_residuals,
    fit_strokes,
    merge_paths,
    rotate_loop,
    segment_paths,
    skeletonize,
)
from bezierglyph.geometry import BezierCurve, Polyline, evaluate_many
from bezierglyph.synthetic import bar_image, blank, blobs_image, cross_image, ring_image


def mask_from(rows):
    return np.array([[ch == "#" for ch in r] for r in rows])


def graph_of(rows):
    return build_pixel_graph(mask_from(rows))


PLUS = [".#.", "###", ".#."]


# -- binarize ---------------------------------------------------------------


def test_binarize_examples():
    img = blank(16)
    img[5:7, 3:13] = 0
    fixed = ExtractionConfig(binarize_threshold=128)
    fg = binarize(img, fixed)
    assert fg.sum() == 20 and fg[5:7, 3:13].all()
    inverted = 255 - img
    assert np.array_equal(binarize(inverted, fixed), fg)
    assert np.array_equal(binarize(img), fg)
    with pytest.raises(EmptyGlyph):
        binarize(blank(16))


def test_config_validation():
    with pytest.raises(ValueError):
        ExtractionConfig(binarize_threshold="mean")
    with pytest.raises(ValueError):
        ExtractionConfig(rdp_epsilon=0)


# -- skeleton ---------------------------------------------------------------


def test_skeleton_examples():
    single = np.zeros((5, 5), bool)
    single[2, 2] = True
    assert np.array_equal(skeletonize(single), single)

    bar = np.zeros((7, 15), bool)
    bar[2:5, 2:13] = True
    sk = skeletonize(bar)
    assert np.nonzero(sk.any(axis=1))[0].tolist() == [3]
    assert sk[3].sum() >= 7

    blobs = np.zeros((20, 20), bool)
    blobs[2:8, 2:8] = True
    blobs[12:18, 10:19] = True
    assert count_components(skeletonize(blobs)) == 2


@pytest.mark.parametrize("img", [bar_image(64, 6), cross_image(64, 6), ring_image(64, 20, 5), blobs_image(64, 3, 4)])
def test_skeleton_thin_and_topology(img):
    fg = binarize(img)
    sk = skeletonize(fg)
    assert count_components(sk) == count_components(fg)
    assert not (sk & ~fg).any()
    # no 2x2 fully-inked block survives
    quads = sk[:-1, :-1] & sk[1:, :-1] & sk[:-1, 1:] & sk[1:, 1:]
    assert not quads.any()


@settings(max_examples=40)
@given(st.lists(st.tuples(st.integers(1, 20), st.integers(1, 20), st.integers(1, 8), st.integers(1, 8)), min_size=1, max_size=4))
def test_skeleton_preserves_components(rects):
    mask = np.zeros((32, 32), bool)
    for x, y, w, h in rects:
        mask[y : y + h, x : x + w] = True
    assert count_components(skeletonize(mask)) == count_components(mask)


# -- graph and paths --------------------------------------------------------


def test_graph_examples():
    row = graph_of(["###"])
    assert [row.node_degree[n] for n in row.nodes] == [1, 2, 1]
    plus = graph_of(PLUS)
    assert plus.degree((1, 1)) == 4
    corner = graph_of(["#.", "##"])
    assert len(corner.edges) == 2
    assert ((0, 0), (1, 1)) not in corner.edges


def test_segment_examples():
    line = graph_of(["#" * 10])
    (path,) = segment_paths(line)
    assert len(path) == 10

    plus = segment_paths(graph_of(PLUS))
    assert len(plus) == 4
    assert all((1, 1) in (p.pixels[0], p.pixels[-1]) for p in plus)

    ring = segment_paths(graph_of([".##.", "#..#", "#..#", ".##."]))
    assert len(ring) == 1 and ring[0].closed and len(ring[0]) == 9


def _edge_counter(paths):
    return Counter(e for p in paths for e in p.edges())


@settings(max_examples=60)
@given(st.lists(st.lists(st.booleans(), min_size=12, max_size=12), min_size=12, max_size=12))
def test_segment_edge_partition(cells):
    graph = build_pixel_graph(np.array(cells))
    counts = _edge_counter(segment_paths(graph))
    assert set(counts) == graph.edges
    assert all(v == 1 for v in counts.values())


def test_spur_pruning():
    rows = ["..........", "##########", "....#.....", ".........."]
    full = segment_paths(graph_of(rows))
    pruned = segment_paths(graph_of(rows), min_path_pixels=4)
    assert len(full) == 3
    assert len(pruned) == 1 and len(pruned[0]) == 10


# -- merge and fit ----------------------------------------------------------


def test_merge_examples():
    cfg = ExtractionConfig()
    left = PixelPath(((0, 5), (1, 5), (2, 5), (3, 5), (4, 5)))
    right = PixelPath(((4, 5), (5, 5), (6, 5), (7, 5)))
    (merged,) = merge_paths([left, right], cfg)
    assert merged.vertices[0] == (0, 5) and merged.vertices[-1] == (7, 5) and len(merged) == 8

    down = PixelPath(((4, 5), (4, 6), (4, 7), (4, 8)))
    assert len(merge_paths([left, down], cfg)) == 2

    single = Polyline(((0, 0), (3, 4)))
    assert merge_paths([single], cfg) == [single]


def test_merge_picks_straightest_continuation():
    cfg = ExtractionConfig()
    west = Polyline(((0, 10), (10, 10)))
    east = Polyline(((10, 10), (20, 10)))
    bent = Polyline(((10, 10), (20, 15)))
    out = merge_paths([west, bent, east], cfg)
    assert Polyline(((0, 10), (10, 10), (20, 10))) in out
    assert bent in out


def test_fit_examples():
    cfg = ExtractionConfig()
    (line,) = fit_strokes([Polyline(((2, 3), (9, 7)))], cfg)
    assert line.control_points == ((2, 3), (9, 7))
    (flat,) = fit_strokes([Polyline(tuple((float(x), 2.0 * x) for x in range(5)))], cfg)
    assert flat.degree == 1


def test_fit_recovers_quadratic():
    # chord-length parameters only approximate the true ones, so the bend is
    # kept moderate enough for a quadratic to pass at the default tolerance
    truth = BezierCurve(((0, 0), (50, 30), (100, 0)))
    pts = evaluate_many(truth, np.linspace(0, 1, 200))
    cfg = ExtractionConfig()
    (fit,) = fit_strokes([Polyline(tuple(map(tuple, pts)))], cfg)
    assert fit.degree == 2
    assert np.abs(fit.array - truth.array).max() <= cfg.fit_tolerance


@settings(max_examples=80)
@given(st.lists(st.tuples(st.integers(0, 60), st.integers(0, 60)), min_size=2, max_size=25), st.floats(0.5, 4))
def test_fit_soundness(pts, tol):
    pts = [p for k, p in enumerate(pts) if k == 0 or p != pts[k - 1]]
    if len(pts) < 2:
        return
    arr = Polyline(tuple(pts)).array
    pieces = fit_pieces(arr, tol)
    assert pieces[0].first == 0 and pieces[-1].last == len(arr) - 1
    assert all(a.last == b.first for a, b in zip(pieces, pieces[1:]))
    for piece in pieces:
        part = arr[piece.first : piece.last + 1]
        assert len(piece.params) == len(part)
        assert np.all(np.diff(piece.params) >= 0)
        worst = fit_residuals(part, piece.params, piece.curve.array).max()
        assert worst <= tol + 1e-9 and worst == pytest.approx(piece.residual)


def test_closed_loop_is_cut_into_quarters():
    theta = np.linspace(0, 2 * np.pi, 41)
    loop = np.column_stack([50 + 40 * np.cos(theta), 50 + 40 * np.sin(theta)])
    loop[-1] = loop[0]
    pieces = fit_pieces(loop, 2.0)
    assert [(p.first, p.last) for p in pieces] == [(0, 10), (10, 20), (20, 30), (30, 40)]
    # the seam moves to the sharpest corner
    square = np.array([(0, 5), (0, 10), (10, 10), (10, 0), (0, 0), (0, 5)], float)
    assert rotate_loop(square)[0].tolist() == [0, 10]
    curves = fit_strokes([Polyline(tuple(map(tuple, square)))])
    assert len(curves) == 4 and all(c.degree == 1 for c in curves)


# -- full pipeline ----------------------------------------------------------


def test_extract_bar():
    seq = extract_glyph(bar_image(96, 8))
    (stroke,) = seq.strokes
    assert stroke.degree == 1
    ends = sorted(stroke.control_points)
    assert ends[0] == pytest.approx((0.05, 0.5), abs=0.05)
    assert ends[1] == pytest.approx((0.95, 0.5), abs=0.05)


def test_extract_vertical_bar_points_up():
    (stroke,) = extract_glyph(bar_image(96, 8, vertical=True)).strokes
    xs, ys = stroke.array.T
    assert np.allclose(xs, 0.5, atol=0.05)
    assert sorted(ys) == pytest.approx([0.05, 0.95], abs=0.05)


def test_extract_cross():
    seq = extract_glyph(cross_image(96, 8))
    assert len(seq) == 2
    dirs = sorted(tuple(np.round(np.abs(c.array[-1] - c.array[0]) > 0.5)) for c in seq)
    assert dirs == [(False, True), (True, False)]


def test_extract_blank():
    with pytest.raises(EmptyGlyph):
        extract_glyph(blank(32))


@pytest.mark.parametrize("img", [bar_image(80, 5), cross_image(90, 7), ring_image(96, 30, 6), blobs_image(100, 3, 5)])
def test_extract_normalized_and_deterministic(img):
    a, b = extract_glyph(img), extract_glyph(img.copy())
    assert a == b
    pts = np.vstack([c.array for c in a])
    assert pts.min() >= 0 and pts.max() <= 1
    span = max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]))
    assert span >= 0.9 - 1e-9
