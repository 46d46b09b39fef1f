"""Condition-based multimodal label fusion.

Pairs visible and infrared annotations of the same image by rotated IoU,
then fuses: a matched pair contributes the infrared geometry with the
visible category; everything unmatched is carried over verbatim. Fusion
never averages or synthesizes geometry.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .annotations import FUSED, FusedLabelSet, ImagePairLabels, ModalityLabelSet
from .errors import ImageIdMismatch
from .geometry import rotated_iou

DEFAULT_TAU = 0.7


@dataclass(frozen=True)
class CMIoUMatrix:
    """m x n table of pairwise rotated IoUs, rows over visible, columns over infrared."""

    m: int
    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.m, self.n):
            raise ValueError(f"values shape {self.values.shape} != ({self.m}, {self.n})")


@dataclass(frozen=True)
class MatchSet:
    """One-to-one (visible index, infrared index) pairs whose CMIoU exceeds tau."""

    pairs: tuple[tuple[int, int], ...]
    tau: float


def cmiou_matrix(rgb: ModalityLabelSet, inf: ModalityLabelSet) -> CMIoUMatrix:
    """Pairwise rotated IoUs between the two modalities' boxes."""
    if rgb.image_id != inf.image_id:
        raise ImageIdMismatch(f"label sets for {rgb.image_id!r} vs {inf.image_id!r}")
    values = np.zeros((len(rgb), len(inf)))
    for i, r in enumerate(rgb.records):
        for j, s in enumerate(inf.records):
            values[i, j] = rotated_iou(r.box, s.box)
    return CMIoUMatrix(m=len(rgb), n=len(inf), values=values)


def select_matches(matrix: CMIoUMatrix, tau: float = DEFAULT_TAU) -> MatchSet:
    """Greedy one-to-one assignment over entries strictly above tau.

    Candidates are taken in descending CMIoU order, ties broken by smaller i
    then smaller j; a row or column is used at most once. The threshold is
    strict: an entry exactly equal to tau does not match.
    """
    if not 0 < tau < 1:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    candidates = [
        (float(matrix.values[i, j]), i, j)
        for i in range(matrix.m)
        for j in range(matrix.n)
        if matrix.values[i, j] > tau
    ]
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    used_i: set[int] = set()
    used_j: set[int] = set()
    pairs = []
    for _, i, j in candidates:
        if i in used_i or j in used_j:
            continue
        used_i.add(i)
        used_j.add(j)
        pairs.append((i, j))
    return MatchSet(pairs=tuple(pairs), tau=tau)


def fuse_labels(rgb: ModalityLabelSet, inf: ModalityLabelSet, matches: MatchSet) -> FusedLabelSet:
    """Apply the fusion rules to one image.

    Matched pair (i, j): one record with the infrared box and the visible
    category (difficulty follows the category, i.e. the visible record).
    Unmatched records from either side are kept verbatim. Output order:
    matched pairs by i, unmatched visible by i, unmatched infrared by j.
    """
    if rgb.image_id != inf.image_id:
        raise ImageIdMismatch(f"label sets for {rgb.image_id!r} vs {inf.image_id!r}")
    for i, j in matches.pairs:
        if not (0 <= i < len(rgb) and 0 <= j < len(inf)):
            raise IndexError(f"match ({i}, {j}) outside {len(rgb)}x{len(inf)} label sets")
    matched_i = {i for i, _ in matches.pairs}
    matched_j = {j for _, j in matches.pairs}

    records = []
    for i, j in sorted(matches.pairs):
        donor = inf.records[j]
        records.append(replace(rgb.records[i], box=donor.box, quad=donor.quad, source=FUSED))
    for i, r in enumerate(rgb.records):
        if i not in matched_i:
            records.append(r.with_source(FUSED))
    for j, r in enumerate(inf.records):
        if j not in matched_j:
            records.append(r.with_source(FUSED))
    return FusedLabelSet(image_id=rgb.image_id, modality=FUSED, records=tuple(records))


def fuse_image_pair(pair: ImagePairLabels, tau: float = DEFAULT_TAU) -> "FusionOutcome":
    """Full per-image pipeline: CMIoU matrix, matching, fusion."""
    matrix = cmiou_matrix(pair.visible, pair.infrared)
    matches = select_matches(matrix, tau)
    fused = fuse_labels(pair.visible, pair.infrared, matches)
    return FusionOutcome(
        image_id=pair.image_id,
        m=matrix.m,
        n=matrix.n,
        matched=len(matches.pairs),
        fused=fused,
    )


@dataclass(frozen=True)
class FusionOutcome:
    """Per-image fusion result plus the counts the size invariant is stated over."""

    image_id: str
    m: int
    n: int
    matched: int
    fused: FusedLabelSet


@dataclass(frozen=True)
class FusionFailure:
    image_id: str
    error: str


def fuse_dataset(
    pairs: Iterable[ImagePairLabels], tau: float = DEFAULT_TAU
) -> tuple[list[FusionOutcome], list[FusionFailure]]:
    """Fuse every image pair; per-image errors are collected, not raised.

    Outcomes and failures are both sorted by image_id.
    """
    outcomes = []
    failures = []
    for pair in pairs:
        try:
            outcomes.append(fuse_image_pair(pair, tau))
        except Exception as exc:  # noqa: BLE001 - per-image isolation is the contract
            failures.append(FusionFailure(image_id=pair.image_id, error=f"{type(exc).__name__}: {exc}"))
    outcomes.sort(key=lambda o: o.image_id)
    failures.sort(key=lambda f: f.image_id)
    return outcomes, failures
