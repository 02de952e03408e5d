"""Pydantic request/response models for the HTTP service and the CLI client."""

from __future__ import annotations

from typing import Optional, Union

from pydantic import BaseModel, Field

from ..config import RunConfig
from ..count_prior import DEFAULT_BASE_LEVELS
from ..simulate import DEFAULT_COUNT_RANGES

BoxCoords = list[float]  # [x_min, y_min, x_max, y_max]
Category = Union[int, str]


class ImageSize(BaseModel):
    w: float = Field(gt=0)
    h: float = Field(gt=0)


class SceneObject(BaseModel):
    category: Category
    box: BoxCoords


class Scene(BaseModel):
    image: ImageSize
    objects: list[SceneObject]


class Detection(BaseModel):
    category: Category
    score: float = Field(ge=0, le=1)
    box: BoxCoords


class SceneSpecModel(BaseModel):
    count_ranges: dict[str, tuple[int, int]] = Field(
        default_factory=lambda: dict(DEFAULT_COUNT_RANGES)
    )
    size_range: tuple[float, float] = (16.0, 64.0)
    image_w: float = 1024.0
    image_h: float = 1024.0
    max_overlap: float = 0.2
    max_retries: int = 10_000


class NoiseSpecModel(BaseModel):
    jitter_std: float = 0.0
    true_score: tuple[float, float] = (0.7, 1.0)
    spurious_score: tuple[float, float] = (0.05, 0.5)
    fp_rate: float = 0.0
    miss_rate: float = 0.0


class SimulateRequest(BaseModel):
    spec: SceneSpecModel = Field(default_factory=SceneSpecModel)
    seed: int


class SimulateResponse(BaseModel):
    scene: Scene
    counts: dict[str, int]


class AssignCountsRequest(BaseModel):
    counts: dict[str, int]
    levels: list[int] = Field(default_factory=lambda: list(DEFAULT_BASE_LEVELS))
    seed: int


class AssignCountsResponse(BaseModel):
    assignment: dict[str, dict[str, dict]]
    num_positive: int
    num_negative: int


class PredictCountsRequest(BaseModel):
    categories: list[str]
    levels: list[int] = Field(default_factory=lambda: list(DEFAULT_BASE_LEVELS))
    scores: list[list[tuple[float, float]]]  # [category][level] -> (object, not-object)
    regressions: list[list[float]]
    score_threshold: float = 0.7


class PredictCountsResponse(BaseModel):
    counts: dict[str, float]


class LabelAnchorsRequest(BaseModel):
    grid_w: int = Field(ge=1)
    grid_h: int = Field(ge=1)
    scales: list[float] = [96.0, 128.0, 256.0, 512.0]
    ratios: list[float] = [1.0, 2.0, 0.5]
    stride: float = 16.0
    ground_truth: list[SceneObject]
    pos_iou: float = 0.5
    neg_iou: float = 0.3
    neg_ratio: int = 3
    seed: int


class AnchorLabelModel(BaseModel):
    anchor_index: int
    category: int
    gt_index: Optional[int] = None
    offsets: Optional[list[float]] = None
    sampled: bool


class LabelAnchorsResponse(BaseModel):
    num_anchors: int
    labels: list[AnchorLabelModel]


class NmsRequest(BaseModel):
    detections: list[Detection]
    iou_threshold: float = 0.3
    per_category: dict[str, float] = Field(default_factory=dict)


class DetectionsResponse(BaseModel):
    detections: list[Detection]


class SelectRequest(BaseModel):
    detections: list[Detection]
    counts: dict[str, float]
    pos_factor: int = 100
    base_budget: int = 100


class SelectResponse(BaseModel):
    budgets: dict[str, int]
    detections: list[Detection]


class EvaluateRequest(BaseModel):
    detections: list[Detection]
    ground_truth: list[SceneObject]
    iou_threshold: float = 0.5
    eleven_point: bool = False


class CategoryEval(BaseModel):
    ap: float
    tp: int
    fp: int
    fn: int
    curve: list[tuple[float, float]]


class EvaluateResponse(BaseModel):
    categories: dict[str, CategoryEval]
    map: float


class PipelineRequest(BaseModel):
    config: RunConfig = Field(default_factory=RunConfig)
    scene: SceneSpecModel = Field(default_factory=SceneSpecModel)
    noise: NoiseSpecModel = Field(default_factory=NoiseSpecModel)
    seed: int


class PipelineResponse(BaseModel):
    true_counts: dict[str, int]
    predicted_counts: dict[str, float]
    budgets: dict[str, int]
    num_detections: int
    num_selected: int
    report: EvaluateResponse
