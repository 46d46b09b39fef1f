# Oriented-detection scoring: greedy IoU matching, AP50 per category, mAP50.
#
# Run:  python demos/05_evaluation.py

import numpy as np

from obbfuse import (
    VISIBLE,
    AnnotationRecord,
    DetectionRecord,
    ModalityLabelSet,
    RotatedBox,
    evaluate_map,
)

rng = np.random.default_rng(11)

# Ground truth: three images, a handful of cars and trucks each.
gt_sets, detections = [], []
for k in range(3):
    records = []
    for j in range(4):
        box = RotatedBox(
            cx=float(rng.uniform(30, 220)), cy=float(rng.uniform(30, 220)),
            w=float(rng.uniform(14, 40)), h=float(rng.uniform(8, 16)),
            angle=float(rng.uniform(-1.5, 1.5)),
        )
        category = "car" if j % 2 == 0 else "truck"
        records.append(AnnotationRecord(box, category, source=VISIBLE))

        # a detector that localizes well but misses some trucks,
        # plus the occasional hallucination
        if category == "car" or rng.random() < 0.5:
            jittered = RotatedBox(box.cx + rng.normal(0, 1.5), box.cy + rng.normal(0, 1.5),
                                  box.w * 1.05, box.h * 1.05, box.angle + rng.normal(0, 0.05))
            detections.append(DetectionRecord(f"img{k}", jittered, category, float(rng.uniform(0.6, 0.99))))
    detections.append(
        DetectionRecord(f"img{k}", RotatedBox(400, 400, 20, 10, 0.3), "car", float(rng.uniform(0.1, 0.4)))
    )
    gt_sets.append(ModalityLabelSet(f"img{k}", VISIBLE, tuple(records)))

for mode in ("voc11", "area"):
    result = evaluate_map(detections, gt_sets, iou_thr=0.5, mode=mode)
    print(f"--- {mode} interpolation ---")
    for category, ap in sorted(result.aps.items()):
        c = result.counts[category]
        print(f"  {category:6s} gt={c.num_gt:2d} tp={c.tp:2d} fp={c.fp:2d} AP50={ap:.4f}")
    print(f"  mAP50 = {result.map50:.4f}")

# The same machinery drives the CLI:
#   obbfuse eval --dets DIR --gts DIR --mode area --json results.json
