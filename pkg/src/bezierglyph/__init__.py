"""Raster glyphs to Bezier-curve programs, and the Geometric Score for grading them."""

__version__ = "0.1.0"

from .extraction import EmptyGlyph, ExtractionConfig, extract_glyph
from .geometry import BezierCurve, Polyline, StrokeSequence
from .metrics import EmptyInput, MetricConfig, ScoreReport, geometric_score, win_rate
from .rendering import AxisOverlayConfig, rasterize_strokes, render_axis_overlay
from .serialization import ParseError, emit_bezierseq, emit_svg, parse_bezierseq

__all__ = [
    "AxisOverlayConfig",
    "BezierCurve",
    "EmptyGlyph",
    "EmptyInput",
    "ExtractionConfig",
    "MetricConfig",
    "ParseError",
    "Polyline",
    "ScoreReport",
    "StrokeSequence",
    "emit_bezierseq",
    "emit_svg",
    "extract_glyph",
    "geometric_score",
    "parse_bezierseq",
    "rasterize_strokes",
    "render_axis_overlay",
    "win_rate",
]
