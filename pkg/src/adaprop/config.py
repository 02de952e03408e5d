"""Run configuration: every tunable constant in one declarative object.

Defaults follow the reference operating point: nine base levels
(1..64), alpha=1, beta=0.5, positive/negative anchor IoU 0.5/0.3,
NMS IoU 0.3, evaluation IoU 0.5, positive factor 100 with a budget floor of
100, and a count-score threshold of 0.7.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from pydantic import BaseModel, Field, model_validator

from .count_prior import DEFAULT_BASE_LEVELS

__all__ = ["RunConfig", "CONFIG_ENV_VAR", "load_config"]

CONFIG_ENV_VAR = "ADAPROP_CONFIG"


class RunConfig(BaseModel):
    """All knobs for assignment, selection, and evaluation."""

    base_levels: tuple[int, ...] = DEFAULT_BASE_LEVELS
    count_score_threshold: float = Field(0.7, gt=0, lt=1)
    alpha: float = Field(1.0, ge=0)
    beta: float = Field(0.5, gt=0)

    anchor_scales: tuple[float, ...] = (96.0, 128.0, 256.0, 512.0)
    anchor_ratios: tuple[float, ...] = (1.0, 2.0, 0.5)
    anchor_stride: float = Field(16.0, gt=0)

    pos_iou: float = Field(0.5, gt=0, lt=1)
    neg_iou: float = Field(0.3, gt=0, lt=1)
    neg_ratio: int = Field(3, ge=1)

    nms_iou: float = Field(0.3, gt=0, lt=1)
    nms_iou_per_category: dict[str, float] = Field(default_factory=dict)
    eval_iou: float = Field(0.5, gt=0, lt=1)

    pos_factor: int = Field(100, ge=1)
    base_budget: int = Field(100, ge=0)

    seed: int = 0

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if list(self.base_levels) != sorted(set(self.base_levels)) or any(
            b < 1 for b in self.base_levels
        ):
            raise ValueError("base_levels must be strictly increasing and >= 1")
        if self.neg_iou > self.pos_iou:
            raise ValueError("neg_iou must not exceed pos_iou")
        return self


def load_config(path: str | os.PathLike | None = None) -> RunConfig:
    """Load a config file (JSON); fall back to $ADAPROP_CONFIG, then defaults."""
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        return RunConfig()
    return RunConfig.model_validate(json.loads(Path(path).read_text()))
