# Edge feature extraction: directional gradients, the stabilized magnitude
# map, and the multi-scale encoder that turns one edge map into a
# four-level feature pyramid.
#
# Run:  python demos/03_edge_features.py

from pathlib import Path

import numpy as np

from obbfuse import export_edge_map, gp, mge, msfe_forward, random_bundle, msfe_weight_shapes

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

# Synthetic 3-channel "infrared" frame: smooth gradient background plus a
# bright rotated block, the kind of hot target the edge branch is after.
h = w = 64
yy, xx = np.mgrid[0:h, 0:w]
frame = np.stack([0.2 + 0.3 * yy / h] * 3)
frame[:, 20:34, 24:44] = 0.9

u_v, u_h = gp(frame)
print("vertical response range:  [%.3f, %.3f]" % (u_v.min(), u_v.max()))
print("horizontal response range:[%.3f, %.3f]" % (u_h.min(), u_h.max()))

edges = mge(frame)  # sqrt(v^2 + h^2 + 1e-6), so a flat frame floors at 1e-3
print("edge magnitude range:     [%.4f, %.4f]" % (edges.min(), edges.max()))

pgm_path = out_dir / "edges.pgm"
export_edge_map(edges, pgm_path)
print("wrote", pgm_path, "- the block outline shows as a bright rectangle")

# The encoder needs learned weights; for a forward-only demo a seeded
# pseudo-random bundle stands in (same seed, same bundle, every platform).
bundle = random_bundle(msfe_weight_shapes(), seed=42)
pyramid = msfe_forward(edges, bundle)
print("pyramid levels:")
for level, feat in enumerate(pyramid, start=1):
    print(f"  level {level}: shape {feat.shape}, mean activation {feat.mean():.4f}")
