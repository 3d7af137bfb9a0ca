import numpy as np
import pytest
from hypothesis import settings, strategies as st

from bezierglyph.geometry import BezierCurve, StrokeSequence

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

unit = st.floats(0.0, 1.0, allow_nan=False, allow_infinity=False)
coord = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)


@st.composite
def curves(draw, elements=unit, min_points=2, max_points=4):
    n = draw(st.integers(min_points, max_points))
    pts = draw(st.lists(st.tuples(elements, elements), min_size=n, max_size=n))
    return BezierCurve(tuple(pts))


@st.composite
def sequences(draw, min_strokes=0, max_strokes=8):
    strokes = draw(st.lists(curves(), min_size=min_strokes, max_size=max_strokes))
    return StrokeSequence(tuple(strokes))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
