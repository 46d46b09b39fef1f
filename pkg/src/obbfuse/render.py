"""Static visual artifacts: SVG overlays of oriented labels on an image, and
16-bit edge-map export (PGM P5 or PNG).

Rendering is deterministic: identical inputs produce byte-identical output.
"""

from __future__ import annotations

import base64
import hashlib
import mimetypes
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .annotations import ModalityLabelSet
from .errors import IoFailure, ShapeMismatch
from .geometry import quad_from_rbox
from .imageio import image_size

PGM_MAXVAL = 65535


@dataclass(frozen=True)
class OverlayStyle:
    stroke_width: float = 2.0
    font_size: int = 12
    show_category: bool = True


def category_color(category: str) -> str:
    """Stable per-category stroke color derived from an md5 digest."""
    digest = hashlib.md5(category.encode("utf-8")).digest()
    # keep channels away from full dark so strokes stay visible
    r, g, b = (64 + v % 192 for v in digest[:3])
    return f"#{r:02x}{g:02x}{b:02x}"


def render_overlay(image_path: str | Path, labels: ModalityLabelSet, style: OverlayStyle = OverlayStyle()) -> str:
    """SVG document embedding the raster plus one rotated-rect path per record.

    Coordinates are image pixels; stroke color is keyed by category.
    """
    image_path = Path(image_path)
    width, height = image_size(image_path)
    try:
        raw = image_path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {image_path}: {exc}") from exc
    mime = mimetypes.guess_type(image_path.name)[0] or "application/octet-stream"
    encoded = base64.b64encode(raw).decode("ascii")

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<image width="{width}" height="{height}" href="data:{mime};base64,{encoded}"/>',
    ]
    for record in labels.records:
        corners = quad_from_rbox(record.box).vertices
        d = "M " + " L ".join(f"{x:.2f} {y:.2f}" for x, y in corners) + " Z"
        color = category_color(record.category)
        parts.append(f'<path d="{d}" fill="none" stroke="{color}" stroke-width="{style.stroke_width:g}"/>')
        if style.show_category:
            tx, ty = corners[0]
            parts.append(
                f'<text x="{tx:.2f}" y="{ty - 3:.2f}" fill="{color}" '
                f'font-size="{style.font_size}" font-family="sans-serif">{_escape(record.category)}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def normalize_u16(x: np.ndarray) -> np.ndarray:
    """Per-channel min-max scale of a (C, H, W) map to [0, 65535] uint16.

    A flat channel (min == max) maps to zeros. 3-channel input collapses to
    one channel by pixelwise maximum after normalization.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[0] not in (1, 3):
        raise ShapeMismatch(f"edge map must be (1|3, H, W), got shape {x.shape}")
    scaled = np.zeros_like(x)
    for c in range(x.shape[0]):
        lo, hi = x[c].min(), x[c].max()
        if hi > lo:
            scaled[c] = (x[c] - lo) / (hi - lo) * PGM_MAXVAL
    collapsed = scaled.max(axis=0)
    return np.rint(collapsed).astype(np.uint16)


def write_pgm16(path: str | Path, image: np.ndarray) -> None:
    """Binary PGM (P5), maxval 65535, big-endian sample order."""
    image = np.asarray(image)
    if image.ndim != 2 or image.dtype != np.uint16:
        raise ShapeMismatch(f"PGM writer needs a 2-D uint16 array, got {image.dtype} {image.shape}")
    h, w = image.shape
    header = f"P5\n{w} {h}\n{PGM_MAXVAL}\n".encode("ascii")
    try:
        Path(path).write_bytes(header + image.astype(">u2").tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def export_edge_map(x: np.ndarray, path: str | Path) -> None:
    """Normalize and write an edge map; PNG when the suffix is .png, else PGM."""
    path = Path(path)
    image = normalize_u16(x)
    if path.suffix.lower() == ".png":
        from PIL import Image

        try:
            Image.fromarray(image).save(path)
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc
    else:
        write_pgm16(path, image)
