"""Geometric Score: stroke similarity, optimal matching and score shaping.

Every reward is computed on the same parameter grid for both curves, so the
distance and angle terms compare c_gt(t_j) with c_gen(t_j). Only the
composite similarity takes the better of the two orientations of the
generated stroke.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import (
    BezierCurve,
    StrokeSequence,
    arc_length,
    evaluate_many,
    reverse_curve,
    sample_params,
    unit_tangents,
)

ZERO_LENGTH = 1e-9


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class MetricConfig:
    sample_count: int = 10
    w_distance: float = 0.6
    w_length: float = 0.2
    w_angle: float = 0.2
    sigmoid_center: float = 0.8
    sigmoid_steepness: float = 10.0
    apply_sigmoid: bool = True

    def __post_init__(self):
        if self.sample_count < 2:
            raise ValueError("sample_count must be >= 2")
        weights = (self.w_distance, self.w_length, self.w_angle)
        if min(weights) < 0 or not math.isclose(sum(weights), 1.0, abs_tol=1e-9):
            raise ValueError(f"weights must be non-negative and sum to 1, got {weights}")
        if self.sigmoid_steepness <= 0:
            raise ValueError("sigmoid_steepness must be positive")


DEFAULT_CONFIG = MetricConfig()


@dataclass(frozen=True)
class MatchAssignment:
    pairs: tuple[tuple[int, int], ...]
    total: float

    def to_json(self) -> dict:
        return {"pairs": [list(p) for p in self.pairs], "total": self.total}


@dataclass(frozen=True)
class ScoreReport:
    geometric: float
    distance: float
    angle: float
    length: float
    base_geometric: float
    assignment: MatchAssignment
    gt_strokes: int
    gen_strokes: int
    diagnostics: tuple[str, ...] = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "geometric": self.geometric,
            "distance": self.distance,
            "angle": self.angle,
            "length": self.length,
            "base_geometric": self.base_geometric,
            "gt_strokes": self.gt_strokes,
            "gen_strokes": self.gen_strokes,
            "assignment": self.assignment.to_json(),
        }


# ---------------------------------------------------------------------------
# Per-pair rewards


@dataclass(frozen=True)
class _Samples:
    points: np.ndarray
    tangents: np.ndarray
    length: float


def _samples(curve: BezierCurve, k: int) -> _Samples:
    ts = sample_params(k)
    return _Samples(evaluate_many(curve, ts), unit_tangents(curve, ts), arc_length(curve))


def _distance(a: _Samples, b: _Samples) -> float:
    d = np.hypot(*(a.points - b.points).T)
    return 1.0 / (1.0 + float(np.mean(d)))


def _length(a: _Samples, b: _Samples) -> float:
    la, lb = a.length, b.length
    small_a, small_b = la < ZERO_LENGTH, lb < ZERO_LENGTH
    if small_a and small_b:
        return 1.0
    if small_a or small_b:
        return 0.0
    return min(la, lb) / max(la, lb)


def _angle(a: _Samples, b: _Samples) -> float:
    # degenerate tangents are zero vectors, so they contribute cos = 0
    cos = np.einsum("ij,ij->i", a.tangents, b.tangents)
    cos = np.clip(cos, -1.0, 1.0)
    return float(np.mean((cos + 1.0) / 2.0))


def _weighted(a: _Samples, b: _Samples, config: MetricConfig) -> float:
    return (
        config.w_distance * _distance(a, b)
        + config.w_length * _length(a, b)
        + config.w_angle * _angle(a, b)
    )


def distance_reward(a: BezierCurve, b: BezierCurve, config: MetricConfig = DEFAULT_CONFIG) -> float:
    k = config.sample_count
    return _distance(_samples(a, k), _samples(b, k))


def length_reward(a: BezierCurve, b: BezierCurve) -> float:
    return _length(_samples(a, 2), _samples(b, 2))


def angle_reward(a: BezierCurve, b: BezierCurve, config: MetricConfig = DEFAULT_CONFIG) -> float:
    k = config.sample_count
    return _angle(_samples(a, k), _samples(b, k))


def composite_similarity(
    gt: BezierCurve, gen: BezierCurve, config: MetricConfig = DEFAULT_CONFIG
) -> float:
    k = config.sample_count
    g = _samples(gt, k)
    forward = _weighted(g, _samples(gen, k), config)
    backward = _weighted(g, _samples(reverse_curve(gen), k), config)
    return max(forward, backward)


def build_matrices(
    gt: StrokeSequence | Sequence[BezierCurve],
    gen: StrokeSequence | Sequence[BezierCurve],
    config: MetricConfig = DEFAULT_CONFIG,
) -> dict[str, np.ndarray]:
    """Similarity matrices keyed ``distance``, ``angle``, ``length``, ``composite``.

    Rows index ground-truth strokes, columns generated strokes.
    """
    gt, gen = list(gt), list(gen)
    if not gt or not gen:
        raise EmptyInput("similarity matrices need non-empty stroke lists")
    k = config.sample_count
    gs = [_samples(c, k) for c in gt]
    fw = [_samples(c, k) for c in gen]
    bw = [_samples(reverse_curve(c), k) for c in gen]
    shape = (len(gt), len(gen))
    out = {name: np.zeros(shape) for name in ("distance", "angle", "length", "composite")}
    for i, a in enumerate(gs):
        for j, (b, rb) in enumerate(zip(fw, bw)):
            d, ang, ln = _distance(a, b), _angle(a, b), _length(a, b)
            out["distance"][i, j] = d
            out["angle"][i, j] = ang
            out["length"][i, j] = ln
            forward = config.w_distance * d + config.w_length * ln + config.w_angle * ang
            out["composite"][i, j] = max(forward, _weighted(a, rb, config))
    return out


# ---------------------------------------------------------------------------
# Assignment


def _hungarian_min(cost: list[list[int]]) -> list[int]:
    """Minimum-cost perfect matching on a square integer matrix.

    Shortest augmenting paths with row/column potentials. Integer arithmetic
    keeps it exact. Returns ``col_of_row``.
    """
    n = len(cost)
    inf = None  # integers are unbounded, so "infinity" is an explicit sentinel
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)  # p[j]: row matched to column j (1-based, 0 = free)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = cost[i0 - 1]
            delta = inf
            j1 = 0
            ui0 = u[i0]
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - ui0 - v[j]
                if minv[j] is inf or cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if delta is inf or minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col_of_row = [0] * n
    for j in range(1, n + 1):
        if p[j]:
            col_of_row[p[j] - 1] = j - 1
    return col_of_row


def assign_optimal(matrix: np.ndarray | Sequence[Sequence[float]]) -> MatchAssignment:
    """Maximum-weight one-to-one matching of rows to columns.

    Entries are converted to exact rationals, so the maximum is exact over
    the float values given. Among optimal assignments the lexicographically
    smallest (row-sorted) pair list wins: each row carries a tie-break bonus
    in a positional number system whose total can never outweigh one unit
    of real similarity. Rectangular inputs are padded with zero dummies.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise EmptyInput("assignment needs a non-empty 2-D matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("similarity matrix must be finite")
    rows, cols = m.shape
    n = max(rows, cols)

    fracs = [[Fraction(float(x)) for x in r] for r in m]
    denom = 1
    for r in fracs:
        for f in r:
            denom = math.lcm(denom, f.denominator)
    base = cols + 1
    scale = base**rows  # strictly exceeds any possible bonus total
    weight = [[0] * n for _ in range(n)]
    for i in range(rows):
        digit_weight = base ** (rows - 1 - i)
        for j in range(cols):
            exact = fracs[i][j].numerator * (denom // fracs[i][j].denominator)
            weight[i][j] = exact * scale + (cols - j) * digit_weight
    top = max(max(r) for r in weight)
    cost = [[top - w for w in r] for r in weight]
    col_of_row = _hungarian_min(cost)

    pairs = tuple(
        (i, col_of_row[i]) for i in range(rows) if col_of_row[i] < cols
    )
    total = math.fsum(float(m[i, j]) for i, j in pairs)
    return MatchAssignment(pairs, total)


# ---------------------------------------------------------------------------
# Normalisation and shaping


def _logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def shape_score(x: float, config: MetricConfig = DEFAULT_CONFIG) -> float:
    """Logistic centred at ``sigmoid_center``, rescaled so f(0)=0 and f(1)=1."""
    c, k = config.sigmoid_center, config.sigmoid_steepness
    lo = _logistic(-k * c)
    hi = _logistic(k * (1.0 - c))
    val = (_logistic(k * (x - c)) - lo) / (hi - lo)
    return min(1.0, max(0.0, val))


def normalize_and_shape(
    total: float, gt_count: int, gen_count: int, config: MetricConfig = DEFAULT_CONFIG
) -> tuple[float, float]:
    if gt_count < 1 or gen_count < 1:
        raise ValueError("stroke counts must be >= 1")
    base = min(1.0, max(0.0, total / max(gt_count, gen_count)))
    final = shape_score(base, config) if config.apply_sigmoid else base
    return base, final


def geometric_score(
    gt: StrokeSequence | Sequence[BezierCurve],
    gen: StrokeSequence | Sequence[BezierCurve],
    config: MetricConfig = DEFAULT_CONFIG,
) -> ScoreReport:
    gt, gen = list(gt), list(gen)
    if not gt:
        raise EmptyInput("ground truth has no strokes")
    if not gen:
        return ScoreReport(
            geometric=0.0, distance=0.0, angle=0.0, length=0.0, base_geometric=0.0,
            assignment=MatchAssignment((), 0.0),
            gt_strokes=len(gt), gen_strokes=0,
            diagnostics=("generated sequence is empty; all scores set to 0",),
        )
    mats = build_matrices(gt, gen, config)
    finals = {}
    composite_match = None
    base_geometric = 0.0
    for name, mat in mats.items():
        match = assign_optimal(mat)
        base, final = normalize_and_shape(match.total, len(gt), len(gen), config)
        finals[name] = final
        if name == "composite":
            composite_match = match
            base_geometric = base
    return ScoreReport(
        geometric=finals["composite"],
        distance=finals["distance"],
        angle=finals["angle"],
        length=finals["length"],
        base_geometric=base_geometric,
        assignment=composite_match,
        gt_strokes=len(gt),
        gen_strokes=len(gen),
    )


def win_rate(wins: int, ties: int, losses: int) -> float:
    """Percentage with ties counted as half a win, rounded to 2 decimals."""
    if min(wins, ties, losses) < 0:
        raise ValueError("counts must be non-negative")
    total = wins + ties + losses
    if total == 0:
        raise ValueError("no comparisons")
    pct = Decimal(2 * wins + ties) * 100 / Decimal(2 * total)
    return float(pct.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))
