"""Rasterise stroke programs and draw the labelled coordinate frame.

Canvases are (height, width) uint8 arrays, white (255) background, black
(0) ink. Normalized y points up; raster rows point down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .geometry import BezierCurve, StrokeSequence, evaluate_many

WHITE, BLACK = 255, 0
MIN_CANVAS = 16

Box = tuple[float, float, float, float]  # left, top, right, bottom (pixel centres)


@dataclass(frozen=True)
class AxisOverlayConfig:
    margin_frac: float = 0.12
    tick_step: float = 0.1
    label_decimals: int = 1
    glyph_stroke_px: float = 3.0
    size: int = 512

    def __post_init__(self):
        if not 0 < self.tick_step <= 0.5:
            raise ValueError("tick_step must be in (0, 0.5]")
        if not 0 < self.margin_frac < 0.4:
            raise ValueError("margin_frac must be in (0, 0.4)")
        if self.label_decimals < 0:
            raise ValueError("label_decimals must be >= 0")
        if self.glyph_stroke_px <= 0:
            raise ValueError("glyph_stroke_px must be positive")
        if self.size < MIN_CANVAS:
            raise ValueError(f"size must be >= {MIN_CANVAS}")


def blank_canvas(width: int, height: int | None = None) -> np.ndarray:
    height = width if height is None else height
    if width < MIN_CANVAS or height < MIN_CANVAS:
        raise ValueError(f"canvas must be at least {MIN_CANVAS}x{MIN_CANVAS}")
    return np.full((height, width), WHITE, dtype=np.uint8)


def _to_pixels(points: np.ndarray, box: Box) -> np.ndarray:
    left, top, right, bottom = box
    x = left + points[:, 0] * (right - left)
    y = bottom - points[:, 1] * (bottom - top)
    return np.column_stack([x, y])


def stamp_discs(canvas: np.ndarray, centres: np.ndarray, radius: float, clip: Box | None = None) -> None:
    """Ink every pixel whose centre lies within ``radius`` of some centre."""
    radius = max(radius, 0.5)
    h, w = canvas.shape
    r = int(math.ceil(radius)) + 1
    off = np.arange(-r, r + 1)
    ox, oy = np.meshgrid(off, off)
    ox, oy = ox.ravel(), oy.ravel()
    base = np.floor(centres).astype(np.int64)
    px = base[:, 0:1] + ox[None, :]
    py = base[:, 1:2] + oy[None, :]
    d2 = (px - centres[:, 0:1]) ** 2 + (py - centres[:, 1:2]) ** 2
    hit = d2 <= radius * radius
    if clip is None:
        x_lo, y_lo, x_hi, y_hi = 0, 0, w - 1, h - 1
    else:
        x_lo, y_lo = math.ceil(clip[0]), math.ceil(clip[1])
        x_hi, y_hi = math.floor(clip[2]), math.floor(clip[3])
    hit &= (px >= max(x_lo, 0)) & (px <= min(x_hi, w - 1))
    hit &= (py >= max(y_lo, 0)) & (py <= min(y_hi, h - 1))
    canvas[py[hit], px[hit]] = BLACK


def draw_curve(canvas: np.ndarray, curve: BezierCurve, box: Box, width_px: float, clip: Box | None = None) -> None:
    h, w = canvas.shape
    steps = 4 * max(h, w)
    pts = evaluate_many(curve, np.linspace(0.0, 1.0, steps + 1))
    stamp_discs(canvas, _to_pixels(pts, box), width_px / 2.0, clip)


def rasterize_strokes(
    sequence: StrokeSequence, canvas: Union[int, tuple[int, int]] = 512, stroke_width_px: float = 3.0
) -> np.ndarray:
    """Draw a normalized program onto a white canvas.

    ``canvas`` is a side length or a ``(width, height)`` pair. The unit
    square maps onto pixel centres ``0 .. width-1`` and ``0 .. height-1``.
    """
    if not sequence.normalized:
        raise ValueError("rasterize_strokes expects normalized coordinates")
    if stroke_width_px <= 0:
        raise ValueError("stroke width must be positive")
    width, height = (canvas, canvas) if isinstance(canvas, int) else canvas
    out = blank_canvas(width, height)
    box = (0.0, 0.0, float(width - 1), float(height - 1))
    for curve in sequence.strokes:
        draw_curve(out, curve, box, stroke_width_px)
    return out


# ---------------------------------------------------------------------------
# Bitmap digits, 5 wide x 7 tall, rows top to bottom

_FONT = {
    "0": ["01110", "10001", "10011", "10101", "11001", "10001", "01110"],
    "1": ["00100", "01100", "00100", "00100", "00100", "00100", "01110"],
    "2": ["01110", "10001", "00001", "00010", "00100", "01000", "11111"],
    "3": ["11111", "00010", "00100", "00010", "00001", "10001", "01110"],
    "4": ["00010", "00110", "01010", "10010", "11111", "00010", "00010"],
    "5": ["11111", "10000", "11110", "00001", "00001", "10001", "01110"],
    "6": ["00110", "01000", "10000", "11110", "10001", "10001", "01110"],
    "7": ["11111", "00001", "00010", "00100", "01000", "01000", "01000"],
    "8": ["01110", "10001", "10001", "01110", "10001", "10001", "01110"],
    "9": ["01110", "10001", "10001", "01111", "00001", "00010", "01100"],
    ".": ["00", "00", "00", "00", "00", "11", "11"],
    "-": ["00000", "00000", "00000", "11111", "00000", "00000", "00000"],
}
_FONT_BITS = {ch: np.array([[c == "1" for c in row] for row in rows]) for ch, rows in _FONT.items()}


def text_bitmap(text: str, scale: int = 1) -> np.ndarray:
    """Boolean ink mask for ``text`` (one column of spacing between glyphs)."""
    cols = []
    for k, ch in enumerate(text):
        if k:
            cols.append(np.zeros((7, 1), dtype=bool))
        cols.append(_FONT_BITS[ch])
    mask = np.hstack(cols) if cols else np.zeros((7, 0), dtype=bool)
    return np.kron(mask, np.ones((scale, scale), dtype=bool))


def _blit(canvas: np.ndarray, mask: np.ndarray, top: int, left: int) -> None:
    h, w = canvas.shape
    mh, mw = mask.shape
    y0, x0 = max(top, 0), max(left, 0)
    y1, x1 = min(top + mh, h), min(left + mw, w)
    if y0 >= y1 or x0 >= x1:
        return
    sub = mask[y0 - top : y1 - top, x0 - left : x1 - left]
    region = canvas[y0:y1, x0:x1]
    region[sub] = BLACK


@dataclass(frozen=True)
class OverlayLayout:
    box: Box
    axis_row: int
    axis_col: int
    tick_len: int
    font_scale: int
    ticks: tuple[float, ...]
    x_tick_cols: tuple[int, ...]
    y_tick_rows: tuple[int, ...]


def overlay_layout(config: AxisOverlayConfig) -> OverlayLayout:
    size = config.size
    margin = max(int(round(config.margin_frac * size)), 4)
    pad = max(margin // 3, 2)
    left, top = margin, pad
    right, bottom = size - 1 - pad, size - 1 - margin
    n = int(math.floor(1.0 / config.tick_step + 1e-9))
    ticks = tuple(round(i * config.tick_step, 12) for i in range(n + 1))
    cols = tuple(int(round(left + v * (right - left))) for v in ticks)
    rows = tuple(int(round(bottom - v * (bottom - top))) for v in ticks)
    gap = max(2, size // 170)
    return OverlayLayout(
        box=(float(left), float(top), float(right), float(bottom)),
        axis_row=bottom + gap,
        axis_col=left - gap,
        tick_len=max(3, size // 64),
        font_scale=max(1, size // 256),
        ticks=ticks,
        x_tick_cols=cols,
        y_tick_rows=rows,
    )


def _paste_raster(canvas: np.ndarray, glyph: np.ndarray, box: Box) -> None:
    left, top, right, bottom = (int(v) for v in box)
    th, tw = bottom - top + 1, right - left + 1
    gh, gw = glyph.shape
    ri = (np.arange(th) * gh) // th
    ci = (np.arange(tw) * gw) // tw
    resized = glyph[np.ix_(ri, ci)]
    region = canvas[top : bottom + 1, left : right + 1]
    np.minimum(region, resized, out=region)


def render_axis_overlay(
    glyph: Union[np.ndarray, StrokeSequence, None], config: AxisOverlayConfig = AxisOverlayConfig()
) -> np.ndarray:
    """Glyph inside the unit box plus labelled x (bottom) and y (left) axes.

    A raster glyph is resampled (nearest neighbour) onto the unit box; a
    stroke program is drawn there directly. Glyph ink is clipped to the box
    so the label margin only ever holds axis marks.
    """
    lay = overlay_layout(config)
    canvas = blank_canvas(config.size)
    if isinstance(glyph, StrokeSequence):
        for curve in glyph.strokes:
            draw_curve(canvas, curve, lay.box, config.glyph_stroke_px, clip=lay.box)
    elif glyph is not None:
        _paste_raster(canvas, np.asarray(glyph, dtype=np.uint8), lay.box)

    left, top, right, bottom = (int(v) for v in lay.box)
    ar, ac, tl, s = lay.axis_row, lay.axis_col, lay.tick_len, lay.font_scale
    canvas[ar, ac : right + 1] = BLACK
    canvas[top : ar + 1, ac] = BLACK

    label_h = 7 * s
    for v, col, row in zip(lay.ticks, lay.x_tick_cols, lay.y_tick_rows):
        canvas[ar + 1 : ar + 1 + tl, col] = BLACK
        canvas[row, ac - tl : ac] = BLACK
        if v == 0:
            continue
        label = text_bitmap(f"{v:.{config.label_decimals}f}", s)
        _blit(canvas, label, ar + tl + 2 * s, col - label.shape[1] // 2)
        _blit(canvas, label, row - label_h // 2, ac - tl - s - label.shape[1])
    origin = text_bitmap(f"{0:.{config.label_decimals}f}", s)
    _blit(canvas, origin, ar + tl + 2 * s, ac - tl - s - origin.shape[1])
    return canvas
