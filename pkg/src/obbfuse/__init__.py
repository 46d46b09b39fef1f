"""Rotated-box geometry, cross-modal label fusion, edge/fusion forward
kernels, loss combination, and oriented AP50 evaluation for multispectral
remote-sensing annotation sets.
"""

from .annotations import (
    FUSED,
    INFRARED,
    VISIBLE,
    AnnotationRecord,
    FusedLabelSet,
    ImagePairLabels,
    ModalityLabelSet,
    read_label_file,
    write_label_file,
)
from .cmlf import (
    CMIoUMatrix,
    MatchSet,
    cmiou_matrix,
    fuse_dataset,
    fuse_labels,
    select_matches,
)
from .edgeops import K_H, K_V, PyramidSpec, conv2d, gp, mge, msfe_forward
from .errors import (
    CategoryMismatch,
    DegenerateQuad,
    ImageIdMismatch,
    IoFailure,
    MalformedLine,
    MissingWeight,
    ObbfuseError,
    ShapeMismatch,
)
from .evaluation import (
    DetectionRecord,
    EvalResult,
    MatchFlag,
    ap_from_pr,
    evaluate_map,
    greedy_match,
)
from .geometry import (
    ConvexPolygon,
    QuadPolygon,
    RotatedBox,
    convex_intersection,
    polygon_area,
    quad_from_rbox,
    rbox_from_quad,
    rotated_iou,
)
from .losses import LevelLossTerms, LossConfig, branch_loss, indicator, sms_total
from .render import OverlayStyle, export_edge_map, render_overlay
from .smff import awe_forward, cbam_forward, deformable_sample, offset_fields, smff_fuse
from .weights import WeightBundle, msfe_weight_shapes, random_bundle, smff_weight_shapes

__version__ = "0.1.0"
