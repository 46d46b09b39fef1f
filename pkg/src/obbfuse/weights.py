"""Named-tensor weight bundles: lookup, binary container I/O, seeded generation.

Container layout (all integers little-endian): magic "WBND", version u16,
entry count u32; per entry: name length u16, UTF-8 name, rank u8, one u32
per dimension, then the values as little-endian IEEE-754 float32 in
row-major order. In memory tensors are float64; storage rounds to float32.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import IoFailure, MissingWeight

MAGIC = b"WBND"
VERSION = 1
MAX_RANK = 4


def fetch(weights: Mapping[str, np.ndarray], name: str) -> np.ndarray:
    try:
        return np.asarray(weights[name], dtype=np.float64)
    except KeyError:
        raise MissingWeight(f"weight bundle has no entry {name!r}") from None


class WeightBundle(dict):
    """Mapping of tensor name -> numpy array with save/load and scoped views."""

    def scoped(self, prefix: str) -> "WeightBundle":
        """Sub-bundle of entries under "prefix.", with the prefix stripped."""
        start = prefix + "."
        return WeightBundle({k[len(start):]: v for k, v in self.items() if k.startswith(start)})

    def save(self, path: str | Path) -> None:
        chunks = [MAGIC, struct.pack("<H", VERSION), struct.pack("<I", len(self))]
        for name, array in self.items():
            array = np.asarray(array)
            if not 1 <= array.ndim <= MAX_RANK:
                raise ValueError(f"{name!r}: rank must be 1..{MAX_RANK}, got {array.ndim}")
            encoded = name.encode("utf-8")
            chunks.append(struct.pack("<H", len(encoded)))
            chunks.append(encoded)
            chunks.append(struct.pack("<B", array.ndim))
            chunks.append(struct.pack(f"<{array.ndim}I", *array.shape))
            chunks.append(np.ascontiguousarray(array, dtype="<f4").tobytes())
        try:
            Path(path).write_bytes(b"".join(chunks))
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "WeightBundle":
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise IoFailure(f"cannot read {path}: {exc}") from exc
        view = memoryview(data)
        if bytes(view[:4]) != MAGIC:
            raise IoFailure(f"{path}: bad magic {bytes(view[:4])!r}")
        (version,) = struct.unpack_from("<H", view, 4)
        if version != VERSION:
            raise IoFailure(f"{path}: unsupported version {version}")
        (count,) = struct.unpack_from("<I", view, 6)
        offset = 10
        bundle = cls()
        try:
            for _ in range(count):
                (name_len,) = struct.unpack_from("<H", view, offset)
                offset += 2
                name = bytes(view[offset : offset + name_len]).decode("utf-8")
                offset += name_len
                (rank,) = struct.unpack_from("<B", view, offset)
                offset += 1
                if not 1 <= rank <= MAX_RANK:
                    raise IoFailure(f"{path}: entry {name!r} has rank {rank}")
                dims = struct.unpack_from(f"<{rank}I", view, offset)
                offset += 4 * rank
                size = int(np.prod(dims))
                values = np.frombuffer(view, dtype="<f4", count=size, offset=offset)
                offset += 4 * size
                bundle[name] = values.astype(np.float64).reshape(dims)
        except (struct.error, ValueError) as exc:
            raise IoFailure(f"{path}: truncated bundle: {exc}") from exc
        if offset != len(data):
            raise IoFailure(f"{path}: {len(data) - offset} trailing bytes")
        return bundle


def random_bundle(shapes: Mapping[str, tuple[int, ...]], seed: int = 0, scale: float = 0.1) -> WeightBundle:
    """Deterministic pseudo-random bundle for testing and demos.

    Generator: numpy PCG64 seeded with `seed`; tensors are drawn in sorted
    name order as standard normals times `scale`. A fixed seed reproduces
    the same bundle on any platform (for a given numpy version).
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    bundle = WeightBundle()
    for name in sorted(shapes):
        bundle[name] = rng.standard_normal(shapes[name]) * scale
    return bundle


def msfe_weight_shapes(in_channels: int = 3, levels: tuple[tuple[int, int], ...] = ((4, 64), (8, 128), (16, 320), (32, 512))) -> dict[str, tuple[int, ...]]:
    """Name -> shape map for every tensor msfe_forward looks up."""
    shapes: dict[str, tuple[int, ...]] = {}
    cin = in_channels
    for k, (_, channels) in enumerate(levels, start=1):
        prefix = f"msfe.level{k}"
        shapes[f"{prefix}.align.weight"] = (channels, cin, 1, 1)
        shapes[f"{prefix}.align.scale"] = (channels,)
        shapes[f"{prefix}.align.shift"] = (channels,)
        shapes[f"{prefix}.feat.weight"] = (channels, channels, 3, 3)
        shapes[f"{prefix}.feat.scale"] = (channels,)
        shapes[f"{prefix}.feat.shift"] = (channels,)
        cin = channels
    return shapes


def smff_weight_shapes(channels: int, reduction: int = 16) -> dict[str, tuple[int, ...]]:
    """Name -> shape map for every tensor the fusion forward pass looks up."""
    hidden = max(channels // reduction, 1)
    shapes: dict[str, tuple[int, ...]] = {
        "smff.offset1.weight": (18, channels, 3, 3),
        "smff.offset1.bias": (18,),
        "smff.offset2.weight": (18, channels, 3, 3),
        "smff.offset2.bias": (18,),
        "smff.deform1.weight": (channels, channels, 3, 3),
        "smff.deform2.weight": (channels, channels, 3, 3),
        "smff.awe.weight": (2, 2, 7, 7),
    }
    for side in ("smff.cbam1", "smff.cbam2"):
        shapes[f"{side}.ca.fc1.weight"] = (hidden, channels)
        shapes[f"{side}.ca.fc2.weight"] = (channels, hidden)
        shapes[f"{side}.sa.weight"] = (1, 2, 7, 7)
    return shapes
