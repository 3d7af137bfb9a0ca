import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bezierglyph.geometry import BezierCurve, StrokeSequence, reverse_curve
from bezierglyph.metrics import (
    EmptyInput,
    MetricConfig,
    angle_reward,
    assign_optimal,
    build_matrices,
    composite_similarity,
    distance_reward,
    geometric_score,
    length_reward,
    normalize_and_shape,
    shape_score,
    win_rate,
)

from conftest import curves, sequences

H = BezierCurve(((0, 0), (1, 0)))
H_OFFSET = BezierCurve(((0, 0.5), (1, 0.5)))
V = BezierCurve(((0, 0), (0, 1)))


def sigma(x):
    return 1.0 / (1.0 + math.exp(-x))


def brute_force_max(m):
    """Best total over all injections of the smaller side into the larger."""
    m = np.asarray(m, dtype=float)
    r, c = m.shape
    if r <= c:
        return max(math.fsum(m[i, p[i]] for i in range(r)) for p in itertools.permutations(range(c), r))
    return max(math.fsum(m[p[j], j] for j in range(c)) for p in itertools.permutations(range(r), c))


# -- sub-rewards ------------------------------------------------------------


def test_distance_examples():
    assert distance_reward(H, H) == 1.0
    assert distance_reward(H, H_OFFSET) == pytest.approx(1 / 1.5, abs=1e-12)
    ts = np.linspace(0, 1, 10)
    expected = 1 / (1 + np.mean(np.abs(1 - 2 * ts)))
    assert distance_reward(H, reverse_curve(H)) == pytest.approx(expected, abs=1e-12)


def test_length_examples():
    assert length_reward(H, H_OFFSET) == 1.0
    assert length_reward(BezierCurve(((0, 0), (0.5, 0))), H) == 0.5
    dot = BezierCurve(((0.3, 0.3), (0.3, 0.3)))
    assert length_reward(dot, dot) == 1.0
    assert length_reward(dot, H) == 0.0


def test_angle_examples():
    assert angle_reward(H, H) == 1.0
    assert angle_reward(H, reverse_curve(H)) == pytest.approx(0.0, abs=1e-12)
    assert angle_reward(H, V) == pytest.approx(0.5, abs=1e-12)
    # a degenerate tangent counts as cosine 0
    dot = BezierCurve(((0.3, 0.3), (0.3, 0.3)))
    assert angle_reward(H, dot) == pytest.approx(0.5, abs=1e-12)


def test_composite_examples():
    assert composite_similarity(H, H) == 1.0
    assert composite_similarity(H, reverse_curve(H)) == 1.0
    assert composite_similarity(H, H_OFFSET) == pytest.approx(0.8, abs=1e-12)


@given(curves(), curves())
def test_rewards_bounded(a, b):
    for f in (distance_reward, length_reward, angle_reward, composite_similarity):
        assert 0.0 <= f(a, b) <= 1.0


# -- matrices and assignment ------------------------------------------------


def test_matrix_shapes():
    mats = build_matrices([H, V], [H, V, H_OFFSET])
    assert set(mats) == {"distance", "angle", "length", "composite"}
    assert all(m.shape == (2, 3) for m in mats.values())
    same = build_matrices([H, V, H_OFFSET], [H, V, H_OFFSET])["composite"]
    assert np.allclose(np.diag(same), 1.0)
    with pytest.raises(EmptyInput):
        build_matrices([], [H])


def test_assignment_examples():
    one = assign_optimal([[0.7]])
    assert one.pairs == ((0, 0),) and one.total == 0.7
    sq = assign_optimal([[0.9, 0.1, 0.2], [0.3, 0.8, 0.1], [0.2, 0.4, 0.7]])
    assert sq.pairs == ((0, 0), (1, 1), (2, 2)) and sq.total == pytest.approx(2.4, abs=1e-15)
    rect = assign_optimal([[0.1, 0.9, 0.2], [0.8, 0.2, 0.3]])
    assert rect.pairs == ((0, 1), (1, 0)) and rect.total == pytest.approx(1.7, abs=1e-15)
    tall = assign_optimal([[0.1, 0.8], [0.9, 0.2], [0.3, 0.3]])
    assert tall.pairs == ((0, 1), (1, 0))


def test_assignment_ties_are_deterministic():
    m = np.full((3, 3), 0.5)
    assert assign_optimal(m).pairs == ((0, 0), (1, 1), (2, 2))
    assert assign_optimal(m[:, ::-1]).pairs == ((0, 0), (1, 1), (2, 2))


def test_assignment_rejects_bad_input():
    with pytest.raises(EmptyInput):
        assign_optimal(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        assign_optimal([[math.nan]])


matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 5).flatmap(
        lambda c: st.lists(
            st.lists(st.floats(0, 1, allow_nan=False), min_size=c, max_size=c), min_size=r, max_size=r
        )
    )
)


@given(matrices)
def test_assignment_matches_brute_force(m):
    got = assign_optimal(m)
    assert got.total == brute_force_max(m)
    rows = [i for i, _ in got.pairs]
    cols = [j for _, j in got.pairs]
    assert len(got.pairs) == min(len(m), len(m[0]))
    assert len(set(rows)) == len(rows) and len(set(cols)) == len(cols)


@given(st.lists(st.lists(st.sampled_from([0.0, 0.25, 0.5, 1.0]), min_size=4, max_size=4), min_size=4, max_size=4))
def test_assignment_with_many_ties(m):
    assert assign_optimal(m).total == brute_force_max(m)


# -- shaping ----------------------------------------------------------------


def test_sigmoid_examples():
    cfg = MetricConfig()
    assert shape_score(1.0, cfg) == pytest.approx(1.0, abs=1e-15)
    assert shape_score(0.0, cfg) == pytest.approx(0.0, abs=1e-15)
    expected = (0.5 - sigma(-8)) / (sigma(2) - sigma(-8))
    assert shape_score(0.8, cfg) == pytest.approx(expected, abs=1e-12)
    assert normalize_and_shape(0.8, 1, 1, cfg) == (0.8, pytest.approx(expected, abs=1e-12))
    assert normalize_and_shape(1.6, 2, 4, MetricConfig(apply_sigmoid=False)) == (0.4, 0.4)


@given(st.floats(0, 1), st.floats(0, 1))
def test_sigmoid_monotone(x, y):
    if x < y:
        assert shape_score(x) <= shape_score(y)
    xs = np.linspace(0, 1, 201)
    assert np.all(np.diff([shape_score(v) for v in xs]) > 0)


def test_config_validation():
    with pytest.raises(ValueError):
        MetricConfig(w_distance=0.5)
    with pytest.raises(ValueError):
        MetricConfig(sample_count=1)


# -- geometric score --------------------------------------------------------


def test_self_score_is_one():
    seq = StrokeSequence((H, V, BezierCurve(((0.1, 0.2), (0.5, 0.9), (0.8, 0.1)))))
    report = geometric_score(seq, seq)
    assert report.geometric == pytest.approx(1.0, abs=1e-12)
    assert (report.distance, report.angle, report.length) == pytest.approx((1, 1, 1), abs=1e-12)
    shuffled = StrokeSequence(tuple(seq.strokes[i] for i in (2, 0, 1)))
    again = geometric_score(seq, shuffled)
    assert again.to_json() | {"assignment": None} == report.to_json() | {"assignment": None}
    assert again.assignment.pairs == ((0, 1), (1, 2), (2, 0))


def test_empty_generation():
    report = geometric_score([H], [])
    assert report.geometric == report.distance == report.angle == report.length == report.base_geometric == 0.0
    assert report.diagnostics
    with pytest.raises(EmptyInput):
        geometric_score([], [H])


def test_report_json_keys():
    data = geometric_score([H], [V]).to_json()
    assert list(data) == [
        "geometric", "distance", "angle", "length", "base_geometric", "gt_strokes", "gen_strokes", "assignment",
    ]


def test_no_sigmoid_reports_base():
    report = geometric_score([H, V], [H_OFFSET], MetricConfig(apply_sigmoid=False))
    assert report.geometric == report.base_geometric
    assert report.base_geometric == pytest.approx(0.8 / 2, abs=1e-12)


@given(sequences(1, 5), sequences(1, 5), st.randoms(use_true_random=False))
def test_permutation_and_reversal_invariance(gt, gen, rnd):
    report = geometric_score(gt, gen)
    for v in (report.geometric, report.distance, report.angle, report.length, report.base_geometric):
        assert 0.0 <= v <= 1.0
    gt_p, gen_p = list(gt), list(gen)
    rnd.shuffle(gt_p)
    rnd.shuffle(gen_p)
    permuted = geometric_score(gt_p, gen_p)
    for key in ("geometric", "distance", "angle", "length", "base_geometric"):
        assert getattr(permuted, key) == pytest.approx(getattr(report, key), abs=1e-12)
    flipped = [reverse_curve(c) if rnd.random() < 0.5 else c for c in gen]
    assert geometric_score(gt, flipped).geometric == pytest.approx(report.geometric, abs=1e-12)


@given(sequences(1, 4), st.integers(0, 3))
def test_noise_stroke_lowers_base(gt, extra):
    gen = list(gt) + [BezierCurve(((0.5, 0.5), (0.5, 0.5)))] * extra
    # a point far from everything: a stand-in for a near-zero-similarity stroke
    before = geometric_score(gt, gen).base_geometric
    after = geometric_score(gt, gen + [BezierCurve(((1, 1), (1, 1)))]).base_geometric
    assert after < before


# -- win rate ---------------------------------------------------------------


@pytest.mark.parametrize(
    "counts,expected",
    [((142, 7, 1), 97.00), ((139, 8, 3), 95.33), ((128, 21, 1), 92.33), ((113, 32, 5), 86.00),
     ((114, 34, 2), 87.33), ((0, 10, 0), 50.00), ((1, 0, 0), 100.00)],
)
def test_win_rate(counts, expected):
    assert win_rate(*counts) == expected


def test_win_rate_errors():
    with pytest.raises(ValueError):
        win_rate(0, 0, 0)
    with pytest.raises(ValueError):
        win_rate(-1, 2, 0)
