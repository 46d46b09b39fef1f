"""Edge feature guidance numerics: directional gradient filters, the mixed
gradient-magnitude map, and the multi-scale encoder forward pass.

Dense maps are numpy float64 arrays of shape (C, H, W), row-major by
(c, y, x). All operations are pure; inputs are never mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeMismatch
from .weights import fetch

# Fixed vertical / horizontal difference filters of the gradient processor.
K_V = np.array([[0.0, -1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
K_H = np.array([[0.0, 0.0, 0.0], [-1.0, 0.0, 1.0], [0.0, 0.0, 0.0]])

DEFAULT_EPS = 1e-6


def check_chw(x: np.ndarray, channels: int | None = None, name: str = "input") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ShapeMismatch(f"{name} must be (C, H, W), got shape {x.shape}")
    if channels is not None and x.shape[0] != channels:
        raise ShapeMismatch(f"{name} must have {channels} channels, got {x.shape[0]}")
    return x


def conv2d(x: np.ndarray, kernel: np.ndarray, padding: int = 0, stride: int = 1) -> np.ndarray:
    """Standard cross-correlation with zero padding.

    kernel is (C_out, C_in, kH, kW); output spatial size is
    floor((H + 2*padding - kH) / stride) + 1.
    """
    x = check_chw(x)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 4:
        raise ShapeMismatch(f"kernel must be rank 4, got shape {kernel.shape}")
    if kernel.shape[1] != x.shape[0]:
        raise ShapeMismatch(f"kernel expects {kernel.shape[1]} input channels, input has {x.shape[0]}")
    if padding < 0 or stride < 1:
        raise ValueError(f"invalid padding={padding} / stride={stride}")
    _, h, w = x.shape
    _, _, kh, kw = kernel.shape
    if h + 2 * padding < kh or w + 2 * padding < kw:
        raise ShapeMismatch(f"kernel {kh}x{kw} larger than padded input {h + 2 * padding}x{w + 2 * padding}")
    if padding:
        x = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(x, (kh, kw), axis=(1, 2))[:, ::stride, ::stride]
    return np.einsum("chwij,ocij->ohw", windows, kernel)


def _correlate_same_edge(channel: np.ndarray, kernel3x3: np.ndarray) -> np.ndarray:
    """Same-size single-channel cross-correlation with edge-replicate padding."""
    padded = np.pad(channel, 1, mode="edge")
    windows = sliding_window_view(padded, (3, 3))
    return np.einsum("hwij,ij->hw", windows, kernel3x3)


def gp(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel vertical and horizontal edge responses of a 3-channel image.

    Borders use edge replication so constant images are annihilated
    everywhere, not just in the interior.
    """
    u = check_chw(u, channels=3, name="image")
    u_v = np.stack([_correlate_same_edge(u[i], K_V) for i in range(3)])
    u_h = np.stack([_correlate_same_edge(u[i], K_H) for i in range(3)])
    return u_v, u_h


def mge(u: np.ndarray, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Per-pixel gradient magnitude sqrt(v^2 + h^2 + eps), channel-wise.

    eps stabilizes the square root; every output value is >= sqrt(eps).
    """
    if eps < 0 or not math.isfinite(eps):
        raise ValueError(f"eps must be finite and >= 0, got {eps}")
    u_v, u_h = gp(u)
    return np.sqrt(u_v * u_v + u_h * u_h + eps)


def max_pool2(x: np.ndarray) -> np.ndarray:
    """2x2 max pooling, stride 2, no padding."""
    x = check_chw(x)
    c, h, w = x.shape
    if h % 2 or w % 2:
        raise ShapeMismatch(f"max_pool2 needs even spatial size, got {h}x{w}")
    return x.reshape(c, h // 2, 2, w // 2, 2).max(axis=(2, 4))


def bilinear_resize(x: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear spatial resize with half-pixel-center sampling, edges clamped.

    At an exact 2x reduction this degenerates to 2x2 averaging, so constant
    maps stay constant.
    """
    x = check_chw(x)
    c, h, w = x.shape
    if out_h < 1 or out_w < 1:
        raise ShapeMismatch(f"invalid output size {out_h}x{out_w}")
    sy = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    sx = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    y0 = np.clip(np.floor(sy), 0, h - 1).astype(int)
    x0 = np.clip(np.floor(sx), 0, w - 1).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = np.clip(sy - y0, 0.0, 1.0)[:, None]
    fx = np.clip(sx - x0, 0.0, 1.0)[None, :]
    top = x[:, y0[:, None], x0[None, :]] * (1 - fx) + x[:, y0[:, None], x1[None, :]] * fx
    bot = x[:, y1[:, None], x0[None, :]] * (1 - fx) + x[:, y1[:, None], x1[None, :]] * fx
    return top * (1 - fy) + bot * fy


@dataclass(frozen=True)
class PyramidSpec:
    """Per-level (stride, channels) of the multi-scale encoder output."""

    levels: tuple[tuple[int, int], ...] = ((4, 64), (8, 128), (16, 320), (32, 512))

    def __post_init__(self):
        if not self.levels:
            raise ValueError("PyramidSpec needs at least one level")
        for k, (stride, channels) in enumerate(self.levels):
            if stride != 4 * 2**k:
                raise ValueError(f"level {k} stride must be {4 * 2 ** k}, got {stride}")
            if channels < 1:
                raise ValueError(f"level {k} channels must be >= 1, got {channels}")

    @property
    def max_stride(self) -> int:
        return self.levels[-1][0]


DEFAULT_PYRAMID = PyramidSpec()


def conv_unit(x: np.ndarray, weight: np.ndarray, scale: np.ndarray, shift: np.ndarray, padding: int) -> np.ndarray:
    """Convolution, frozen per-channel affine normalization, rectification."""
    y = conv2d(x, weight, padding=padding)
    scale = np.asarray(scale, dtype=np.float64)
    shift = np.asarray(shift, dtype=np.float64)
    if scale.shape != (y.shape[0],) or shift.shape != (y.shape[0],):
        raise ShapeMismatch(f"affine parameters must have shape ({y.shape[0]},), got {scale.shape} / {shift.shape}")
    return np.maximum(y * scale[:, None, None] + shift[:, None, None], 0.0)


def msfe_forward(
    x: np.ndarray, weights, spec: PyramidSpec = DEFAULT_PYRAMID
) -> list[np.ndarray]:
    """Multi-scale encoder: four pyramid levels from a 3-channel edge map.

    Each level runs a 1x1 channel-align ConvU and a 3x3 feature ConvU, then
    downsamples. The first level reduces 4x via 2x max-pool followed by 2x
    bilinear interpolation; each later level applies one further 2x max-pool.
    """
    x = check_chw(x, name="edge map")
    _, h, w = x.shape
    if h % spec.max_stride or w % spec.max_stride:
        raise ShapeMismatch(f"spatial size {h}x{w} must be divisible by {spec.max_stride}")

    outputs = []
    cur = x
    for k, (_, channels) in enumerate(spec.levels, start=1):
        prefix = f"msfe.level{k}"
        align_w = fetch(weights, f"{prefix}.align.weight")
        if align_w.shape != (channels, cur.shape[0], 1, 1):
            raise ShapeMismatch(
                f"{prefix}.align.weight must be {(channels, cur.shape[0], 1, 1)}, got {align_w.shape}"
            )
        cur = conv_unit(cur, align_w, fetch(weights, f"{prefix}.align.scale"), fetch(weights, f"{prefix}.align.shift"), padding=0)
        feat_w = fetch(weights, f"{prefix}.feat.weight")
        if feat_w.shape != (channels, channels, 3, 3):
            raise ShapeMismatch(f"{prefix}.feat.weight must be {(channels, channels, 3, 3)}, got {feat_w.shape}")
        cur = conv_unit(cur, feat_w, fetch(weights, f"{prefix}.feat.scale"), fetch(weights, f"{prefix}.feat.shift"), padding=1)
        cur = max_pool2(cur)
        if k == 1:
            cur = bilinear_resize(cur, cur.shape[1] // 2, cur.shape[2] // 2)
        outputs.append(cur)
    return outputs
