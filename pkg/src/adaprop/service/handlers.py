"""Service logic: pure functions from request models to response models.

The FastAPI routes and the CLI both call these, so file-driven and HTTP runs
share one code path.
"""

from __future__ import annotations

from .. import count_prior
from ..anchor_labels import label_anchors
from ..config import RunConfig
from ..evaluation import EvalReport, evaluate_detections
from ..geometry import AnchorSpec, Box, generate_anchors
from ..pipeline import run_pipeline
from ..selection import ScoredDetection, adaptive_budget, category_nms, select_proposals
from ..simulate import NoiseSpec, SceneSpec, sample_scene
from . import schemas as S

__all__ = [
    "handle_simulate",
    "handle_assign_counts",
    "handle_predict_counts",
    "handle_label_anchors",
    "handle_nms",
    "handle_select",
    "handle_evaluate",
    "handle_pipeline",
]


def _to_detections(models: list[S.Detection]) -> list[ScoredDetection]:
    return [ScoredDetection(Box.from_list(m.box), m.category, m.score) for m in models]


def _from_detections(dets: list[ScoredDetection]) -> list[S.Detection]:
    return [
        S.Detection(category=d.category, score=d.score, box=d.box.to_list()) for d in dets
    ]


def _to_gts(objects: list[S.SceneObject]) -> list[tuple]:
    return [(o.category, Box.from_list(o.box)) for o in objects]


def _report_model(report: EvalReport) -> S.EvaluateResponse:
    return S.EvaluateResponse(
        categories={
            str(cat): S.CategoryEval(
                ap=entry["ap"],
                tp=entry["tp"],
                fp=entry["fp"],
                fn=entry["fn"],
                curve=list(entry["curve"]),
            )
            for cat, entry in report.per_category.items()
        },
        map=report.map,
    )


def handle_simulate(req: S.SimulateRequest) -> S.SimulateResponse:
    spec = SceneSpec(**req.spec.model_dump())
    gts, counts = sample_scene(spec, req.seed)
    scene = S.Scene(
        image=S.ImageSize(w=spec.image_w, h=spec.image_h),
        objects=[S.SceneObject(category=c, box=b.to_list()) for c, b in gts],
    )
    return S.SimulateResponse(scene=scene, counts=counts)


def handle_assign_counts(req: S.AssignCountsRequest) -> S.AssignCountsResponse:
    assign = count_prior.assign_count_levels(req.counts, tuple(req.levels), req.seed)
    return S.AssignCountsResponse(
        assignment=assign.to_json_dict(),
        num_positive=assign.num_positive,
        num_negative=assign.num_negative,
    )


def handle_predict_counts(req: S.PredictCountsRequest) -> S.PredictCountsResponse:
    pred = count_prior.CountPrediction(
        tuple(req.categories), tuple(req.levels), req.scores, req.regressions
    )
    return S.PredictCountsResponse(
        counts=count_prior.predict_counts(pred, req.score_threshold)
    )


def handle_label_anchors(req: S.LabelAnchorsRequest) -> S.LabelAnchorsResponse:
    spec = AnchorSpec(tuple(req.scales), tuple(req.ratios), req.stride)
    anchors = generate_anchors(req.grid_w, req.grid_h, spec)
    gts = [(int(o.category), Box.from_list(o.box)) for o in req.ground_truth]
    labels = label_anchors(
        anchors, gts, req.pos_iou, req.neg_iou, req.neg_ratio, req.seed
    )
    return S.LabelAnchorsResponse(
        num_anchors=len(anchors),
        labels=[S.AnchorLabelModel(**lab.to_json_dict()) for lab in labels],
    )


def handle_nms(req: S.NmsRequest) -> S.DetectionsResponse:
    kept = category_nms(
        _to_detections(req.detections),
        req.per_category or req.iou_threshold,
        req.iou_threshold,
    )
    return S.DetectionsResponse(detections=_from_detections(kept))


def handle_select(req: S.SelectRequest) -> S.SelectResponse:
    budgets = adaptive_budget(req.counts, req.pos_factor, req.base_budget)
    selected = select_proposals(_to_detections(req.detections), budgets)
    return S.SelectResponse(budgets=budgets, detections=_from_detections(selected))


def handle_evaluate(req: S.EvaluateRequest) -> S.EvaluateResponse:
    report = evaluate_detections(
        _to_detections(req.detections),
        _to_gts(req.ground_truth),
        req.iou_threshold,
        eleven_point=req.eleven_point,
    )
    return _report_model(report)


def handle_pipeline(req: S.PipelineRequest) -> S.PipelineResponse:
    result = run_pipeline(
        req.config,
        SceneSpec(**req.scene.model_dump()),
        NoiseSpec(**req.noise.model_dump()),
        req.seed,
    )
    return S.PipelineResponse(
        true_counts=result.true_counts,
        predicted_counts=result.predicted_counts,
        budgets=result.budgets,
        num_detections=len(result.detections),
        num_selected=len(result.selected),
        report=_report_model(result.report),
    )
