"""Oriented annotation files (DOTA-style) and per-modality label sets.

One label file per image, stem = image_id, extension ".txt". Each record is
one line "x1 y1 x2 y2 x3 y3 x4 y4 category difficulty"; optional header
lines starting with "imagesource" or "gsd" are skipped on read and omitted
on write. UTF-8, LF or CRLF accepted on read, LF on write.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

from .errors import DegenerateQuad, IoFailure, ImageIdMismatch, MalformedLine
from .geometry import QuadPolygon, RotatedBox, quad_from_rbox, rbox_from_quad

VISIBLE = "visible"
INFRARED = "infrared"
FUSED = "fused"
MODALITIES = (VISIBLE, INFRARED, FUSED)


@dataclass(frozen=True)
class AnnotationRecord:
    """One labeled object: oriented box, category name, difficulty flag, modality.

    Records parsed from a file also keep the source quadrilateral verbatim;
    serialization re-emits it so that file round trips are lossless. For
    synthetic records (quad None) the box corners are rendered instead.
    """

    box: RotatedBox
    category: str
    difficulty: int = 0
    source: str = VISIBLE
    quad: QuadPolygon | None = None

    def __post_init__(self):
        if not self.category:
            raise ValueError("category must be non-empty")
        if self.difficulty < 0:
            raise ValueError(f"difficulty must be >= 0, got {self.difficulty}")
        if self.source not in MODALITIES:
            raise ValueError(f"source must be one of {MODALITIES}, got {self.source!r}")

    def with_source(self, source: str) -> "AnnotationRecord":
        return replace(self, source=source)

    def corners(self) -> tuple[tuple[float, float], ...]:
        quad = self.quad if self.quad is not None else quad_from_rbox(self.box)
        return quad.vertices


@dataclass(frozen=True)
class ModalityLabelSet:
    """All records of one image for one modality, in file order."""

    image_id: str
    modality: str
    records: tuple[AnnotationRecord, ...] = ()

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ValueError(f"modality must be one of {MODALITIES}, got {self.modality!r}")
        records = tuple(self.records)
        for r in records:
            if r.source != self.modality:
                raise ValueError(f"record source {r.source!r} does not match set modality {self.modality!r}")
        object.__setattr__(self, "records", records)

    def __len__(self) -> int:
        return len(self.records)


# CMLF output: same structure, modality tag "fused".
FusedLabelSet = ModalityLabelSet


@dataclass(frozen=True)
class ImagePairLabels:
    """Visible and infrared label sets of the same image."""

    image_id: str
    visible: ModalityLabelSet
    infrared: ModalityLabelSet

    def __post_init__(self):
        if self.visible.image_id != self.image_id or self.infrared.image_id != self.image_id:
            raise ImageIdMismatch(
                f"pair {self.image_id!r} holds sets for "
                f"{self.visible.image_id!r} / {self.infrared.image_id!r}"
            )


def parse_annotation_line(line: str, source: str = VISIBLE) -> AnnotationRecord:
    """Parse one "x1 y1 ... y4 category difficulty" line into a record.

    The quad is converted to its minimum-area rotated box. Raises
    MalformedLine on wrong token count or non-numeric fields and propagates
    DegenerateQuad.
    """
    tokens = line.split()
    if len(tokens) != 10:
        raise MalformedLine(f"expected 10 tokens, got {len(tokens)}: {line.strip()!r}")
    try:
        coords = [float(t) for t in tokens[:8]]
    except ValueError as exc:
        raise MalformedLine(f"non-numeric coordinate in {line.strip()!r}") from exc
    category = tokens[8]
    try:
        difficulty = int(tokens[9])
    except ValueError as exc:
        raise MalformedLine(f"non-integer difficulty in {line.strip()!r}") from exc
    if difficulty < 0:
        raise MalformedLine(f"negative difficulty in {line.strip()!r}")
    quad = QuadPolygon(((coords[0], coords[1]), (coords[2], coords[3]), (coords[4], coords[5]), (coords[6], coords[7])))
    return AnnotationRecord(box=rbox_from_quad(quad), category=category, difficulty=difficulty, source=source, quad=quad)


def format_annotation_line(record: AnnotationRecord) -> str:
    """Render one record as a DOTA line, coordinates with 1 decimal place."""
    coords = " ".join(f"{v:.1f}" for xy in record.corners() for v in xy)
    return f"{coords} {record.category} {record.difficulty}"


_HEADER_PREFIXES = ("imagesource", "gsd")


def read_label_file(path: str | Path, modality: str = VISIBLE, image_id: str | None = None) -> ModalityLabelSet:
    """Read one label file into a ModalityLabelSet (image_id defaults to the stem)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    records = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.lower().startswith(_HEADER_PREFIXES):
            continue
        try:
            records.append(parse_annotation_line(line, source=modality))
        except MalformedLine as exc:
            raise MalformedLine(str(exc), line_number=number) from exc
        except DegenerateQuad as exc:
            raise MalformedLine(f"degenerate quad: {exc}", line_number=number) from exc
    return ModalityLabelSet(image_id=image_id or path.stem, modality=modality, records=tuple(records))


def write_label_file(labels: ModalityLabelSet, path: str | Path) -> None:
    """Write one label file, one line per record, LF endings."""
    path = Path(path)
    lines = [format_annotation_line(r) for r in labels.records]
    body = "\n".join(lines) + ("\n" if lines else "")
    try:
        path.write_text(body, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_label_dir(directory: str | Path, modality: str = VISIBLE) -> dict[str, ModalityLabelSet]:
    """Read every *.txt label file in a directory, keyed by image_id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise IoFailure(f"not a directory: {directory}")
    out = {}
    for path in sorted(directory.glob("*.txt")):
        out[path.stem] = read_label_file(path, modality=modality)
    return out


def pair_label_dirs(
    visible: dict[str, ModalityLabelSet], infrared: dict[str, ModalityLabelSet]
) -> tuple[list[ImagePairLabels], list[str], list[str]]:
    """Match two per-modality dicts by image_id.

    Returns (pairs sorted by image_id, visible-only ids, infrared-only ids).
    """
    common = sorted(set(visible) & set(infrared))
    pairs = [ImagePairLabels(i, visible[i], infrared[i]) for i in common]
    only_vis = sorted(set(visible) - set(infrared))
    only_inf = sorted(set(infrared) - set(visible))
    return pairs, only_vis, only_inf


def records_from_iterable(image_id: str, modality: str, records: Iterable[AnnotationRecord]) -> ModalityLabelSet:
    """Build a label set, retagging record sources to the set's modality."""
    return ModalityLabelSet(image_id, modality, tuple(r.with_source(modality) for r in records))
