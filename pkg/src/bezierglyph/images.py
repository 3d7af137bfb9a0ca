"""8-bit grayscale image decode/encode (PNG and binary PGM)."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image


def _check_gray(pixels: np.ndarray) -> np.ndarray:
    arr = np.asarray(pixels)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    return arr.astype(np.uint8, copy=False)


def decode_image(data: bytes) -> np.ndarray:
    """Decode PNG or PGM bytes into a (height, width) uint8 array.

    Colour or alpha PNGs are flattened to luminance over a white background.
    """
    with Image.open(io.BytesIO(data)) as im:
        if im.format not in ("PNG", "PPM"):
            raise ValueError(f"unsupported image format {im.format}")
        if im.mode in ("RGBA", "LA", "P") or "transparency" in im.info:
            im = im.convert("RGBA")
            bg = Image.new("RGBA", im.size, (255, 255, 255, 255))
            im = Image.alpha_composite(bg, im)
        if im.mode == "I;16" or im.mode == "I":
            arr = np.asarray(im, dtype=np.float64)
            arr = arr / max(arr.max(), 1.0) * 255.0
            return _check_gray(np.round(arr))
        return _check_gray(np.asarray(im.convert("L")))


def read_image(path: str | Path) -> np.ndarray:
    return decode_image(Path(path).read_bytes())


def encode_png(pixels: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(_check_gray(pixels)).save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def encode_pgm(pixels: np.ndarray) -> bytes:
    arr = _check_gray(pixels)
    h, w = arr.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + arr.tobytes()


def write_image(path: str | Path, pixels: np.ndarray) -> None:
    path = Path(path)
    data = encode_pgm(pixels) if path.suffix.lower() in (".pgm", ".pnm") else encode_png(pixels)
    path.write_bytes(data)
