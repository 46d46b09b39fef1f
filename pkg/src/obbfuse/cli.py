"""Batch command-line front end.

Subcommands: fuse (cross-modal label fusion over parallel label trees),
eval (oriented AP50/mAP50), edges (gradient-magnitude map export), render
(SVG overlay), stats (label-set summary). Exit codes: 0 success, 1
usage/fatal error, 2 partial failure. OBBFUSE_THREADS caps the worker pool.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import annotations, cmlf, edgeops, evaluation, render
from .errors import IoFailure, ObbfuseError
from .imageio import load_image_chw

SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for partial batch failures; argparse would use it for usage errors
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def worker_count() -> int:
    raw = os.environ.get("OBBFUSE_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n >= 1 else (os.cpu_count() or 1)


def _write_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_fuse(args) -> int:
    rgb_dir, ir_dir, out_dir = Path(args.rgb_labels), Path(args.ir_labels), Path(args.out)
    for d in (rgb_dir, ir_dir):
        if not d.is_dir():
            print(f"fuse: not a directory: {d}", file=sys.stderr)
            return 1
    out_dir.mkdir(parents=True, exist_ok=True)

    def read_pair(image_id: str):
        vis = annotations.read_label_file(rgb_dir / f"{image_id}.txt", modality=annotations.VISIBLE)
        inf = annotations.read_label_file(ir_dir / f"{image_id}.txt", modality=annotations.INFRARED)
        return annotations.ImagePairLabels(image_id, vis, inf)

    rgb_ids = {p.stem for p in rgb_dir.glob("*.txt")}
    ir_ids = {p.stem for p in ir_dir.glob("*.txt")}
    shared = sorted(rgb_ids & ir_ids)
    unpaired_rgb = sorted(rgb_ids - ir_ids)
    unpaired_ir = sorted(ir_ids - rgb_ids)

    def process(image_id: str):
        pair = read_pair(image_id)
        outcome = cmlf.fuse_image_pair(pair, tau=args.tau)
        annotations.write_label_file(outcome.fused, out_dir / f"{image_id}.txt")
        return outcome

    outcomes: dict[str, cmlf.FusionOutcome] = {}
    failures: dict[str, str] = {}
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        for image_id, result in zip(shared, pool.map(_guard(process), shared)):
            if isinstance(result, str):
                failures[image_id] = result
            else:
                outcomes[image_id] = result

    images = [
        {"image_id": i, "m": o.m, "n": o.n, "matched": o.matched, "fused": len(o.fused.records)}
        for i, o in sorted(outcomes.items())
    ]
    report = {
        "schema_version": SCHEMA_VERSION,
        "tau": args.tau,
        "images": images,
        "totals": {
            "images": len(images),
            "m": sum(r["m"] for r in images),
            "n": sum(r["n"] for r in images),
            "matched": sum(r["matched"] for r in images),
            "fused": sum(r["fused"] for r in images),
        },
        "unpaired_rgb": unpaired_rgb,
        "unpaired_ir": unpaired_ir,
        "failures": [{"image_id": i, "error": e} for i, e in sorted(failures.items())],
    }
    if args.report:
        _write_json(args.report, report)
    print(
        f"fused {report['totals']['images']} image(s): "
        f"m={report['totals']['m']} n={report['totals']['n']} "
        f"matched={report['totals']['matched']} fused={report['totals']['fused']}"
    )
    for image_id, error in sorted(failures.items()):
        print(f"fuse: {image_id}: {error}", file=sys.stderr)
    return 2 if failures else 0


def _guard(fn):
    def wrapped(arg):
        try:
            return fn(arg)
        except Exception as exc:  # noqa: BLE001 - per-image isolation
            return f"{type(exc).__name__}: {exc}"

    return wrapped


def cmd_eval(args) -> int:
    dets_dir, gts_dir = Path(args.dets), Path(args.gts)
    for d in (dets_dir, gts_dir):
        if not d.is_dir():
            print(f"eval: not a directory: {d}", file=sys.stderr)
            return 1
    classes = [c for c in args.classes.split(",") if c] if args.classes else None
    dets = evaluation.read_detection_dir(dets_dir)
    gts = list(annotations.read_label_dir(gts_dir).values())
    result = evaluation.evaluate_map(dets, gts, iou_thr=args.iou, mode=args.mode, classes=classes)

    width = max([len(c) for c in result.aps] + [8])
    print(f"{'category':<{width}}  {'gt':>6}  {'tp':>6}  {'fp':>6}  {'AP50':>8}")
    for category in sorted(result.aps):
        ap = result.aps[category]
        counts = result.counts[category]
        ap_text = f"{ap:.4f}" if ap is not None else "-"
        print(f"{category:<{width}}  {counts.num_gt:>6}  {counts.tp:>6}  {counts.fp:>6}  {ap_text:>8}")
    print(f"{'mAP50':<{width}}  {'':>6}  {'':>6}  {'':>6}  {result.map50:>8.4f}")

    if args.json:
        _write_json(
            args.json,
            {
                "schema_version": SCHEMA_VERSION,
                "iou_thr": args.iou,
                "mode": args.mode,
                "ap": result.aps,
                "map50": result.map50,
                "counts": {
                    c: {"gt": k.num_gt, "tp": k.tp, "fp": k.fp} for c, k in result.counts.items()
                },
            },
        )
    return 0


def cmd_edges(args) -> int:
    try:
        image = load_image_chw(args.image)
    except IoFailure as exc:
        print(f"edges: {exc}", file=sys.stderr)
        return 1
    if image.shape[0] == 1:
        image = np.repeat(image, 3, axis=0)
    edge_map = edgeops.mge(image, eps=args.eps)
    render.export_edge_map(edge_map, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_render(args) -> int:
    labels = annotations.read_label_file(args.labels)
    svg = render.render_overlay(args.image, labels)
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def cmd_stats(args) -> int:
    labels_dir = Path(args.labels)
    if not labels_dir.is_dir():
        print(f"stats: not a directory: {labels_dir}", file=sys.stderr)
        return 1
    sets = annotations.read_label_dir(labels_dir)
    records = [r for s in sets.values() for r in s.records]

    counts: dict[str, int] = {}
    for r in records:
        counts[r.category] = counts.get(r.category, 0) + 1
    sizes = sorted(np.sqrt(r.box.w * r.box.h) for r in records)
    quantiles = (
        {q: float(np.percentile(sizes, q)) for q in (0, 25, 50, 75, 100)} if sizes else {}
    )
    edges = np.linspace(-np.pi / 2, np.pi / 2, 17)
    hist = np.histogram([r.box.angle for r in records], bins=edges)[0] if records else np.zeros(16, dtype=int)

    print(f"images: {len(sets)}  instances: {len(records)}")
    for category in sorted(counts):
        print(f"  {category}: {counts[category]}")
    if quantiles:
        line = "  ".join(f"p{q}={v:.1f}" for q, v in quantiles.items())
        print(f"size quantiles (sqrt area, px): {line}")
    print("angle histogram (16 bins over [-pi/2, pi/2)): " + " ".join(str(int(v)) for v in hist))

    if args.json:
        _write_json(
            args.json,
            {
                "schema_version": SCHEMA_VERSION,
                "images": len(sets),
                "instances": len(records),
                "category_counts": counts,
                "size_quantiles": quantiles,
                "angle_histogram": [int(v) for v in hist],
            },
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="obbfuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fuse", help="fuse visible/infrared label trees")
    p.add_argument("--rgb-labels", required=True, help="directory of visible label files")
    p.add_argument("--ir-labels", required=True, help="directory of infrared label files")
    p.add_argument("--out", required=True, help="output directory for fused label files")
    p.add_argument("--tau", type=float, default=cmlf.DEFAULT_TAU, help="CMIoU match threshold")
    p.add_argument("--report", help="write a JSON fusion report here")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval", help="oriented AP50 / mAP50")
    p.add_argument("--dets", required=True, help="directory of per-image detection files")
    p.add_argument("--gts", required=True, help="directory of ground-truth label files")
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--mode", choices=("voc11", "area"), default="voc11")
    p.add_argument("--classes", help="comma-separated class list")
    p.add_argument("--json", help="write machine-readable results here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("edges", help="export a gradient-magnitude edge map")
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True, help=".pgm or .png output path")
    p.add_argument("--eps", type=float, default=edgeops.DEFAULT_EPS)
    p.set_defaults(func=cmd_edges)

    p = sub.add_parser("render", help="render labels over an image as SVG")
    p.add_argument("--image", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("stats", help="summarize a label directory")
    p.add_argument("--labels", required=True)
    p.add_argument("--json", help="write machine-readable stats here")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ObbfuseError as exc:
        print(f"obbfuse: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"obbfuse: {exc}", file=sys.stderr)
        return 1


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
