"""Oriented-box detection evaluation: VOC-style greedy matching, per-category
average precision at a rotated-IoU threshold, and the category mean.

Ground truths with difficulty > 0 are matchable but excluded from the
recall denominator, and detections matched to them count neither as true
nor as false positives.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .annotations import ModalityLabelSet
from .errors import CategoryMismatch, IoFailure, MalformedLine
from .geometry import QuadPolygon, RotatedBox, rbox_from_quad, rotated_iou


@dataclass(frozen=True)
class DetectionRecord:
    """One scored prediction."""

    image_id: str
    box: RotatedBox
    category: str
    score: float

    def __post_init__(self):
        if not self.category:
            raise ValueError("category must be non-empty")
        if not math.isfinite(self.score) or not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must lie in [0, 1], got {self.score}")


class MatchFlag(enum.Enum):
    TP = "tp"
    FP = "fp"
    IGNORED = "ignored"


@dataclass(frozen=True)
class CategoryCounts:
    num_gt: int
    tp: int
    fp: int


@dataclass(frozen=True)
class EvalResult:
    """Per-category AP (None where undefined), their mean, and match counts.

    The mean is taken over categories with at least one ground truth.
    """

    aps: dict[str, float | None]
    map50: float
    counts: dict[str, CategoryCounts]


def greedy_match(dets: Sequence[DetectionRecord], gts: ModalityLabelSet, iou_thr: float = 0.5) -> list[MatchFlag]:
    """Flag each detection of one image/category as TP, FP, or IGNORED.

    Detections are processed in the given order (callers pass them sorted by
    descending score, ties in input order). Each detection takes the
    still-unconsumed ground truth of highest IoU >= iou_thr; a non-difficult
    ground truth is consumed by its first match, difficult ones are never
    consumed and matching them ignores the detection.
    """
    consumed = [False] * len(gts.records)
    flags = []
    for det in dets:
        best_iou, best_idx = 0.0, -1
        for idx, gt in enumerate(gts.records):
            if consumed[idx]:
                continue
            iou = rotated_iou(det.box, gt.box)
            if iou > best_iou:
                best_iou, best_idx = iou, idx
        if best_idx >= 0 and best_iou >= iou_thr:
            if gts.records[best_idx].difficulty > 0:
                flags.append(MatchFlag.IGNORED)
            else:
                consumed[best_idx] = True
                flags.append(MatchFlag.TP)
        else:
            flags.append(MatchFlag.FP)
    return flags


def ap_from_pr(flags: Sequence[MatchFlag | bool], num_gt: int, mode: str = "voc11") -> float | None:
    """Average precision from ordered TP/FP flags and the recall denominator.

    mode "voc11": mean of the max precision at recalls {0, 0.1, ..., 1.0};
    mode "area": area under the monotonized precision envelope. Returns 0.0
    when detections exist without ground truth, None (undefined) when there
    is neither.
    """
    if mode not in ("voc11", "area"):
        raise ValueError(f"mode must be 'voc11' or 'area', got {mode!r}")
    if num_gt < 0:
        raise ValueError(f"num_gt must be >= 0, got {num_gt}")
    kept = [f for f in flags if not (isinstance(f, MatchFlag) and f is MatchFlag.IGNORED)]
    hits = [(f is MatchFlag.TP) if isinstance(f, MatchFlag) else bool(f) for f in kept]
    if num_gt == 0:
        return 0.0 if hits else None
    if not hits:
        return 0.0

    tp = fp = 0
    recalls, precisions = [], []
    for hit in hits:
        tp += hit
        fp += not hit
        recalls.append(tp / num_gt)
        precisions.append(tp / (tp + fp))

    if mode == "voc11":
        total = 0.0
        for t in (i / 10 for i in range(11)):
            best = max((p for r, p in zip(recalls, precisions) if r >= t), default=0.0)
            total += best
        return total / 11

    # area mode: monotonize the precision envelope from the right
    env = precisions[:]
    for i in range(len(env) - 2, -1, -1):
        env[i] = max(env[i], env[i + 1])
    ap = 0.0
    prev_r = 0.0
    for r, p in zip(recalls, env):
        ap += (r - prev_r) * p
        prev_r = r
    return ap


def evaluate_map(
    dets: Iterable[DetectionRecord],
    gts: Iterable[ModalityLabelSet],
    iou_thr: float = 0.5,
    mode: str = "voc11",
    classes: Sequence[str] | None = None,
) -> EvalResult:
    """Per-category AP and mean AP over a whole annotation set.

    `gts` holds one label set per image. When `classes` is given, a
    detection naming an unlisted category raises CategoryMismatch, unlisted
    ground truths are ignored, and every listed class gets a result row.
    """
    gts_by_image: dict[str, ModalityLabelSet] = {}
    for labels in gts:
        if labels.image_id in gts_by_image:
            raise ValueError(f"duplicate ground-truth set for image {labels.image_id!r}")
        gts_by_image[labels.image_id] = labels

    dets = list(dets)
    if classes is not None:
        allowed = set(classes)
        for det in dets:
            if det.category not in allowed:
                raise CategoryMismatch(f"detection category {det.category!r} not in class list")
        categories = list(classes)
    else:
        categories = sorted(
            {d.category for d in dets} | {r.category for g in gts_by_image.values() for r in g.records}
        )

    aps: dict[str, float | None] = {}
    counts: dict[str, CategoryCounts] = {}
    for category in categories:
        # stable global score order; matching consumes per-image ground truth
        indexed = [(d, k) for k, d in enumerate(dets) if d.category == category]
        indexed.sort(key=lambda dk: (-dk[0].score, dk[1]))
        per_image: dict[str, list[tuple[DetectionRecord, int]]] = {}
        for d, k in indexed:
            per_image.setdefault(d.image_id, []).append((d, k))

        flags_by_index: dict[int, MatchFlag] = {}
        for image_id, image_dets in per_image.items():
            gt_all = gts_by_image.get(image_id)
            cat_records = tuple(r for r in gt_all.records if r.category == category) if gt_all else ()
            subset = ModalityLabelSet(image_id, gt_all.modality if gt_all else "visible", cat_records)
            flags = greedy_match([d for d, _ in image_dets], subset, iou_thr)
            for (_, k), flag in zip(image_dets, flags):
                flags_by_index[k] = flag
        ordered_flags = [flags_by_index[k] for _, k in indexed]

        num_gt = sum(
            1
            for g in gts_by_image.values()
            for r in g.records
            if r.category == category and r.difficulty == 0
        )
        aps[category] = ap_from_pr(ordered_flags, num_gt, mode)
        counts[category] = CategoryCounts(
            num_gt=num_gt,
            tp=sum(f is MatchFlag.TP for f in ordered_flags),
            fp=sum(f is MatchFlag.FP for f in ordered_flags),
        )

    defined = [aps[c] for c in categories if counts[c].num_gt > 0 and aps[c] is not None]
    map50 = sum(defined) / len(defined) if defined else 0.0
    return EvalResult(aps=aps, map50=map50, counts=counts)


def parse_detection_line(line: str, image_id: str) -> DetectionRecord:
    """Parse one "x1 y1 ... y4 category score" detection line."""
    tokens = line.split()
    if len(tokens) != 10:
        raise MalformedLine(f"expected 10 tokens, got {len(tokens)}: {line.strip()!r}")
    try:
        coords = [float(t) for t in tokens[:8]]
        score = float(tokens[9])
    except ValueError as exc:
        raise MalformedLine(f"non-numeric field in {line.strip()!r}") from exc
    if not 0.0 <= score <= 1.0:
        raise MalformedLine(f"score {score} outside [0, 1]")
    quad = QuadPolygon(((coords[0], coords[1]), (coords[2], coords[3]), (coords[4], coords[5]), (coords[6], coords[7])))
    return DetectionRecord(image_id=image_id, box=rbox_from_quad(quad), category=tokens[8], score=score)


def read_detection_file(path: str | Path, image_id: str | None = None) -> list[DetectionRecord]:
    """Read one per-image detection file (image_id defaults to the stem)."""
    path = Path(path)
    image_id = image_id or path.stem
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    records = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            records.append(parse_detection_line(line, image_id))
        except MalformedLine as exc:
            raise MalformedLine(str(exc), line_number=number) from exc
    return records


def read_detection_dir(directory: str | Path) -> list[DetectionRecord]:
    directory = Path(directory)
    if not directory.is_dir():
        raise IoFailure(f"not a directory: {directory}")
    out: list[DetectionRecord] = []
    for path in sorted(directory.glob("*.txt")):
        out.extend(read_detection_file(path))
    return out
