"""Adaptive per-category region-proposal toolkit.

Count priors against multi-level base numbers, multi-class anchor labeling,
per-category NMS and adaptive proposal budgets, detection evaluation, and a
synthetic scene simulator for end-to-end exercise.
"""

from .anchor_labels import (
    AnchorLabel,
    AnchorPrediction,
    anchor_cls_loss,
    anchor_joint_loss,
    anchor_reg_loss,
    label_anchors,
)
from .config import RunConfig, load_config
from .count_prior import (
    DEFAULT_BASE_LEVELS,
    CountLevelAssignment,
    CountPrediction,
    assign_count_levels,
    count_prior_loss,
    decode_count,
    encode_count,
    in_ignore_band,
    level_diff,
    predict_counts,
)
from .evaluation import (
    EvalReport,
    MatchResult,
    average_precision,
    evaluate_detections,
    match_detections,
    mean_ap,
    precision_recall_curve,
)
from .geometry import (
    AnchorSpec,
    Box,
    BoxOffsets,
    decode_box,
    encode_box,
    generate_anchors,
    iou,
    iou_matrix,
    is_inside,
)
from .losses import ValueGrad, binary_log_loss, finite_diff_check, smooth_l1, softmax_ce
from .pipeline import PipelineResult, run_pipeline
from .selection import (
    ScoredDetection,
    adaptive_budget,
    category_nms,
    score_filter,
    select_proposals,
)
from .simulate import (
    DEFAULT_COUNT_RANGES,
    NoiseSpec,
    SceneSpec,
    oracle_count_prediction,
    perturb_detections,
    sample_scene,
)

__version__ = "0.1.0"
