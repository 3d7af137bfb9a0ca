"""Render-then-extract fidelity on seeded synthetic programs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .extraction import ExtractionConfig, extract_glyph
from .metrics import MetricConfig, geometric_score
from .rendering import rasterize_strokes
from .synthetic import well_separated_sequence


@dataclass(frozen=True)
class RoundTripConfig:
    seed: int = 2024
    count: int = 50
    canvas_px: int = 512
    stroke_px: float = 3.0
    max_strokes: int = 6
    grid: int = 3


def roundtrip_scores(
    config: RoundTripConfig = RoundTripConfig(),
    extraction: ExtractionConfig = ExtractionConfig(),
    metric: MetricConfig = MetricConfig(),
) -> list[float]:
    """Base geometric score of ``extract(render(s))`` against ``s`` per sample."""
    rng = np.random.default_rng(config.seed)
    scores = []
    for _ in range(config.count):
        source = well_separated_sequence(rng, config.max_strokes, config.grid)
        image = rasterize_strokes(source, config.canvas_px, config.stroke_px)
        scores.append(geometric_score(source, extract_glyph(image, extraction), metric).base_geometric)
    return scores
