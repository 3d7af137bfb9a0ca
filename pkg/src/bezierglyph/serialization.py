"""The ``<bezierseq>`` program text format, plus SVG export.

Canonical form::

    <bezierseq><bezier>(0.000 0.000) (1.000 1.000)</bezier></bezierseq>

The parser accepts arbitrary whitespace, prose around the outer tags and
numbers in scientific notation. In lenient mode malformed strokes are
skipped and recorded; in strict mode the first defect raises.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

from .geometry import BezierCurve, StrokeSequence

OPEN_SEQ, CLOSE_SEQ = "<bezierseq>", "</bezierseq>"
OPEN_STROKE, CLOSE_STROKE = "<bezier>", "</bezier>"
MIN_POINTS, MAX_POINTS = 2, 4

_NUMBER = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?"
_POINT = re.compile(rf"\(\s*({_NUMBER})\s*[,\s]\s*({_NUMBER})\s*\)")
_WS = re.compile(r"\s*")


class ParseError(ValueError):
    def __init__(self, offset: int, message: str):
        super().__init__(f"offset {offset}: {message}")
        self.offset = offset
        self.message = message


@dataclass
class ParseDiagnostics:
    errors: list[tuple[int, str]] = field(default_factory=list)
    recovered: bool = False

    def __bool__(self) -> bool:
        return bool(self.errors)


@dataclass(frozen=True)
class BezierSeqDocument:
    sequence: StrokeSequence
    source_text: str | None = None


def _fmt(v: float, precision: int) -> str:
    v = min(1.0, max(0.0, v))
    return f"{v:.{precision}f}"


def emit_bezierseq(sequence: StrokeSequence, precision: int = 3) -> str:
    if not sequence.normalized:
        raise ValueError("bezierseq text holds normalized coordinates only")
    parts = [OPEN_SEQ]
    for curve in sequence.strokes:
        pts = " ".join(f"({_fmt(x, precision)} {_fmt(y, precision)})" for x, y in curve.control_points)
        parts.append(f"{OPEN_STROKE}{pts}{CLOSE_STROKE}")
    parts.append(CLOSE_SEQ)
    return "".join(parts)


class _Parser:
    def __init__(self, text: str, strict: bool):
        self.text = text
        self.strict = strict
        self.diag = ParseDiagnostics()
        self.strokes: list[BezierCurve] = []

    def defect(self, offset: int, message: str) -> None:
        if self.strict:
            raise ParseError(offset, message)
        self.diag.errors.append((offset, message))
        self.diag.recovered = True

    def run(self) -> tuple[StrokeSequence, ParseDiagnostics]:
        text = self.text
        start = text.find(OPEN_SEQ)
        if start < 0:
            raise ParseError(0, f"missing {OPEN_SEQ} wrapper")
        body_start = start + len(OPEN_SEQ)
        end = text.find(CLOSE_SEQ, body_start)
        if end < 0:
            self.defect(len(text), f"missing {CLOSE_SEQ}")
            end = len(text)
        elif self.strict:
            # a second program after the first one is ambiguous
            if text.find(OPEN_SEQ, end) >= 0:
                raise ParseError(text.find(OPEN_SEQ, end), "more than one program")
        self.parse_body(body_start, end)
        return StrokeSequence(tuple(self.strokes)), self.diag

    def parse_body(self, pos: int, end: int) -> None:
        text = self.text
        while True:
            pos = _WS.match(text, pos).end()
            if pos >= end:
                return
            if text.startswith(OPEN_STROKE, pos):
                pos = self.parse_stroke(pos + len(OPEN_STROKE), end)
                continue
            self.defect(pos, f"unexpected text, expected {OPEN_STROKE}")
            nxt = text.find(OPEN_STROKE, pos, end)
            if nxt < 0:
                return
            pos = nxt

    def parse_stroke(self, pos: int, end: int) -> int:
        """Parse points up to ``</bezier>``; returns the resume position."""
        text = self.text
        stroke_at = pos - len(OPEN_STROKE)
        points: list[tuple[float, float]] = []
        while True:
            pos = _WS.match(text, pos).end()
            if text.startswith(CLOSE_STROKE, pos) and pos < end:
                pos += len(CLOSE_STROKE)
                break
            m = _POINT.match(text, pos)
            if m is None or m.end() > end:
                self.defect(pos, f"malformed point or missing {CLOSE_STROKE}")
                return self._resync(pos, end)
            x, y = float(m.group(1)), float(m.group(2))
            if not (math.isfinite(x) and math.isfinite(y)):
                self.defect(pos, "non-finite coordinate")
                return self._resync(pos, end)
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                self.defect(pos, f"coordinate ({x} {y}) outside [0, 1], clamped")
            points.append((min(1.0, max(0.0, x)), min(1.0, max(0.0, y))))
            pos = m.end()
        if not MIN_POINTS <= len(points) <= MAX_POINTS:
            self.defect(stroke_at, f"stroke has {len(points)} points, need {MIN_POINTS}-{MAX_POINTS}")
            return pos
        self.strokes.append(BezierCurve(tuple(points)))
        return pos

    def _resync(self, pos: int, end: int) -> int:
        close = self.text.find(CLOSE_STROKE, pos, end)
        nxt = self.text.find(OPEN_STROKE, pos, end)
        if close >= 0 and (nxt < 0 or close < nxt):
            return close + len(CLOSE_STROKE)
        return nxt if nxt >= 0 else end


def parse_bezierseq(
    text: Union[str, bytes], mode: str = "lenient"
) -> tuple[StrokeSequence, ParseDiagnostics]:
    """Parse program text. Offsets in diagnostics index the decoded string."""
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown parse mode {mode!r}")
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8", errors="replace")
    return _Parser(text, strict=mode == "strict").run()


def parse_document(text: Union[str, bytes], mode: str = "lenient") -> tuple[BezierSeqDocument, ParseDiagnostics]:
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8", errors="replace")
    seq, diag = parse_bezierseq(text, mode)
    return BezierSeqDocument(seq, text), diag


# ---------------------------------------------------------------------------
# SVG


def _num(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


_COMMANDS = {1: "L", 2: "Q", 3: "C"}


def svg_path_data(curve: BezierCurve, canvas_px: float) -> str:
    pts = [(x * canvas_px, (1.0 - y) * canvas_px) for x, y in curve.control_points]
    head = f"M {_num(pts[0][0])} {_num(pts[0][1])}"
    rest = " ".join(f"{_num(x)} {_num(y)}" for x, y in pts[1:])
    return f"{head} {_COMMANDS[curve.degree]} {rest}"


def emit_svg(sequence: StrokeSequence, canvas_px: int = 512, stroke_width_px: float = 3.0) -> str:
    if not sequence.normalized:
        raise ValueError("SVG export expects normalized coordinates")
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{canvas_px}" height="{canvas_px}" viewBox="0 0 {canvas_px} {canvas_px}">',
        f'<g fill="none" stroke="black" stroke-width="{_num(stroke_width_px)}" '
        f'stroke-linecap="round" stroke-linejoin="round">',
    ]
    for curve in sequence.strokes:
        lines.append(f'<path d="{svg_path_data(curve, canvas_px)}"/>')
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
