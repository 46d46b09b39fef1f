"""Image ingestion for the CLI: 8-bit grayscale or RGB PNG/PGM decoded to
float64 (C, H, W) maps in [0, 1]; 16-bit grayscale inputs are accepted too.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import IoFailure


def load_image_chw(path: str | Path) -> np.ndarray:
    """Decode an image file to a (C, H, W) float array in [0, 1], C in {1, 3}."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode in ("I;16", "I;16B", "I;16L"):
                data = np.asarray(img, dtype=np.float64) / 65535.0
                return data[None, :, :]
            if img.mode == "I":
                # 16-bit grayscale lands here (e.g. PGM with maxval 65535)
                data = np.asarray(img, dtype=np.float64) / 65535.0
                return np.clip(data, 0.0, 1.0)[None, :, :]
            if img.mode == "L":
                data = np.asarray(img, dtype=np.float64) / 255.0
                return data[None, :, :]
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
            return rgb.transpose(2, 0, 1)
    except (OSError, UnidentifiedImageError) as exc:
        raise IoFailure(f"cannot decode image {path}: {exc}") from exc


def image_size(path: str | Path) -> tuple[int, int]:
    """(width, height) of an image file without decoding pixel data."""
    try:
        with Image.open(path) as img:
            return img.size
    except (OSError, UnidentifiedImageError) as exc:
        raise IoFailure(f"cannot read image {path}: {exc}") from exc
