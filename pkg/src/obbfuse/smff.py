"""Selective multimodal feature fusion, forward pass only.

Pipeline over two same-shape (C, H, W) feature maps: per-modality offset
prediction, deformable 3x3 alignment with bilinear sampling, CBAM
refinement summed into a fusion attention map, adaptive per-location
weighting via a 2->2 conv + softmax, and the final weighted combination.
Weights come from an externally supplied bundle; nothing here trains.
"""

from __future__ import annotations

import numpy as np

from .edgeops import check_chw, conv2d
from .errors import ShapeMismatch
from .weights import WeightBundle, fetch

# Offset field layout: 18 channels for the 3x3 kernel, taps in row-major
# (ky, kx) order; channel 2k is the y displacement of tap k, 2k+1 the x.
OFFSET_CHANNELS = 18


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _check_same_shape(x1: np.ndarray, x2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x1 = check_chw(x1, name="x1")
    x2 = check_chw(x2, name="x2")
    if x1.shape != x2.shape:
        raise ShapeMismatch(f"modality features differ in shape: {x1.shape} vs {x2.shape}")
    return x1, x2


def offset_fields(x1: np.ndarray, x2: np.ndarray, weights) -> tuple[np.ndarray, np.ndarray]:
    """Predict one 18-channel offset field per modality (3x3 conv + bias)."""
    x1, x2 = _check_same_shape(x1, x2)
    out = []
    for x, name in ((x1, "smff.offset1"), (x2, "smff.offset2")):
        w = fetch(weights, f"{name}.weight")
        b = fetch(weights, f"{name}.bias")
        if w.shape != (OFFSET_CHANNELS, x.shape[0], 3, 3) or b.shape != (OFFSET_CHANNELS,):
            raise ShapeMismatch(f"{name} weights have shapes {w.shape} / {b.shape}")
        out.append(conv2d(x, w, padding=1) + b[:, None, None])
    return out[0], out[1]


def _bilinear_sample_zero(x: np.ndarray, sy: np.ndarray, sx: np.ndarray) -> np.ndarray:
    """Sample (C, H, W) map at fractional (sy, sx), zero outside the image."""
    _, h, w = x.shape
    y0 = np.floor(sy).astype(int)
    x0 = np.floor(sx).astype(int)
    fy = sy - y0
    fx = sx - x0
    out = np.zeros((x.shape[0],) + sy.shape)
    for dy in (0, 1):
        wy = fy if dy else 1.0 - fy
        yy = y0 + dy
        for dx in (0, 1):
            wx = fx if dx else 1.0 - fx
            xx = x0 + dx
            valid = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
            weight = wy * wx * valid
            values = x[:, np.clip(yy, 0, h - 1), np.clip(xx, 0, w - 1)]
            out += values * weight
    return out


def deformable_sample(x: np.ndarray, offsets: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """3x3 deformable convolution: each tap samples at its nominal position
    plus the predicted per-tap displacement, bilinearly, zero outside.

    With all-zero offsets this is exactly conv2d(x, kernel, padding=1).
    """
    x = check_chw(x)
    offsets = check_chw(offsets, channels=OFFSET_CHANNELS, name="offsets")
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 4 or kernel.shape[1] != x.shape[0] or kernel.shape[2:] != (3, 3):
        raise ShapeMismatch(f"deformable kernel must be (C_out, {x.shape[0]}, 3, 3), got {kernel.shape}")
    _, h, w = x.shape
    if offsets.shape[1:] != (h, w):
        raise ShapeMismatch(f"offsets spatial size {offsets.shape[1:]} != feature size {(h, w)}")

    grid_y = np.arange(h)[:, None] * np.ones((1, w))
    grid_x = np.ones((h, 1)) * np.arange(w)[None, :]
    out = np.zeros((kernel.shape[0], h, w))
    for k in range(9):
        ky, kx = divmod(k, 3)
        sy = grid_y + (ky - 1) + offsets[2 * k]
        sx = grid_x + (kx - 1) + offsets[2 * k + 1]
        sampled = _bilinear_sample_zero(x, sy, sx)
        out += np.einsum("ihw,oi->ohw", sampled, kernel[:, :, ky, kx])
    return out


def cbam_forward(x: np.ndarray, weights) -> np.ndarray:
    """CBAM refinement: channel attention then spatial attention.

    `weights` holds the relative names "ca.fc1.weight" (hidden x C),
    "ca.fc2.weight" (C x hidden), "sa.weight" (1 x 2 x 7 x 7); use
    WeightBundle.scoped to address one of the two instances.
    """
    x = check_chw(x)
    c = x.shape[0]
    fc1 = fetch(weights, "ca.fc1.weight")
    fc2 = fetch(weights, "ca.fc2.weight")
    sa_w = fetch(weights, "sa.weight")
    if fc1.ndim != 2 or fc1.shape[1] != c or fc2.shape != (c, fc1.shape[0]):
        raise ShapeMismatch(f"channel-attention MLP shapes {fc1.shape} / {fc2.shape} do not fit C={c}")
    if sa_w.shape != (1, 2, 7, 7):
        raise ShapeMismatch(f"spatial-attention conv must be (1, 2, 7, 7), got {sa_w.shape}")

    avg_desc = x.mean(axis=(1, 2))
    max_desc = x.max(axis=(1, 2))
    mlp = lambda s: fc2 @ np.maximum(fc1 @ s, 0.0)
    channel_att = _sigmoid(mlp(avg_desc) + mlp(max_desc))
    refined = x * channel_att[:, None, None]

    pooled = np.stack([refined.mean(axis=0), refined.max(axis=0)])
    spatial_att = _sigmoid(conv2d(pooled, sa_w, padding=3))
    return refined * spatial_att


def awe_forward(x1t: np.ndarray, x2t: np.ndarray, weights) -> tuple[np.ndarray, np.ndarray]:
    """Adaptive weight extraction: two per-location fusion weights that sum to 1.

    Channel-concatenates the aligned features, collapses to channel-wise
    average and max maps, runs the 2->2 conv, and softmaxes the two output
    channels per location. Each returned map is (1, H, W), broadcastable
    over the feature channels.
    """
    x1t, x2t = _check_same_shape(x1t, x2t)
    awe_w = fetch(weights, "smff.awe.weight")
    if awe_w.shape != (2, 2, 7, 7):
        raise ShapeMismatch(f"smff.awe.weight must be (2, 2, 7, 7), got {awe_w.shape}")
    stacked = np.concatenate([x1t, x2t], axis=0)
    pooled = np.stack([stacked.mean(axis=0), stacked.max(axis=0)])
    logits = conv2d(pooled, awe_w, padding=3)
    logits = logits - logits.max(axis=0, keepdims=True)
    expd = np.exp(logits)
    soft = expd / expd.sum(axis=0, keepdims=True)
    return soft[0:1], soft[1:2]


def smff_fuse(x1: np.ndarray, x2: np.ndarray, weights) -> np.ndarray:
    """Full fusion forward pass; output has the input shape.

    Stages: offset prediction, per-modality deformable alignment, fusion
    attention as the sum of the two CBAM-refined maps, adaptive weights,
    then ((x1~ * w1) + (x2~ * w2)) * attention.
    """
    x1, x2 = _check_same_shape(x1, x2)
    dp1, dp2 = offset_fields(x1, x2, weights)
    x1t = deformable_sample(x1, dp1, fetch(weights, "smff.deform1.weight"))
    x2t = deformable_sample(x2, dp2, fetch(weights, "smff.deform2.weight"))
    bundle = weights if isinstance(weights, WeightBundle) else WeightBundle(weights)
    sa = cbam_forward(x1t, bundle.scoped("smff.cbam1")) + cbam_forward(x2t, bundle.scoped("smff.cbam2"))
    sa1, sa2 = awe_forward(x1t, x2t, weights)
    return (x1t * sa1 + x2t * sa2) * sa
