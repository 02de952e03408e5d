"""End-to-end run: scene -> count prior -> budget -> selection -> evaluation."""

from __future__ import annotations

from dataclasses import dataclass

from .config import RunConfig
from .count_prior import predict_counts
from .evaluation import EvalReport, evaluate_detections
from .selection import ScoredDetection, adaptive_budget, category_nms, select_proposals
from .simulate import NoiseSpec, SceneSpec, oracle_count_prediction, perturb_detections, sample_scene

__all__ = ["PipelineResult", "run_pipeline"]


@dataclass
class PipelineResult:
    gts: list
    true_counts: dict[str, int]
    predicted_counts: dict[str, float]
    budgets: dict[str, int]
    detections: list[ScoredDetection]
    selected: list[ScoredDetection]
    report: EvalReport


def run_pipeline(
    config: RunConfig,
    scene: SceneSpec,
    noise: NoiseSpec,
    seed: int,
) -> PipelineResult:
    """Simulate a scene, decode oracle counts, budget, select, and evaluate.

    The pseudo-detector uses a derived seed (seed + 1) so scene layout and
    detector noise vary independently.
    """
    gts, true_counts = sample_scene(scene, seed)
    oracle = oracle_count_prediction(true_counts, config.base_levels)
    counts = predict_counts(oracle, config.count_score_threshold)
    budgets = adaptive_budget(counts, config.pos_factor, config.base_budget)
    detections = perturb_detections(
        gts, noise, seed + 1, image_w=scene.image_w, image_h=scene.image_h
    )
    kept = category_nms(
        detections, config.nms_iou_per_category or config.nms_iou, config.nms_iou
    )
    selected = select_proposals(kept, budgets)
    report = evaluate_detections(selected, gts, config.eval_iou)
    return PipelineResult(
        gts=gts,
        true_counts=true_counts,
        predicted_counts=counts,
        budgets=budgets,
        detections=detections,
        selected=selected,
        report=report,
    )
